#pragma once

#include "mse/core.hpp"
#include "mse/rembed.hpp"

#include <optional>
#include <set>

namespace mse {

// Cut points lo = i_0 < i_1 < ... < i_z = hi; blocks are (i_r, i_{r+1}].
using Partition = std::vector<i64>;

struct MarkedPartitionPair {
    Partition P, Pp;
    std::vector<bool> marked;  // one flag per block index r in [0, z)
};

// Either one block pair (x0,x1] -> (y0,y1], or a rigid run of singletons x0+u -> y0+u.
struct MapSegment {
    i64 x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool singles = false;
    i64 lx() const { return x1 - x0; }
    i64 ly() const { return y1 - y0; }
    bool operator==(const MapSegment&) const = default;
};

struct GeneralizedMapping {
    std::vector<MapSegment> segs;
    std::set<std::string> tags;  // "admissible", "G", "H1", "H2" once the predicate has passed

    i64 xlo() const { return segs.front().x0; }
    i64 xhi() const { return segs.back().x1; }
    i64 ylo() const { return segs.front().y0; }
    i64 yhi() const { return segs.back().y1; }
    i64 block_count() const;
    // Image / preimage of a singleton block, empty when the block is not a singleton.
    std::optional<i64> image(i64 x) const;
    std::optional<i64> preimage(i64 y) const;
    bool x_singleton(i64 x) const;
    bool y_singleton(i64 y) const;
};

void check_partition(const Partition& p, const char* what);
GeneralizedMapping induce_mapping(const MarkedPartitionPair& mpp);

// Exact comparisons against (1 - 2^-(j + e/8)) / R and R (1 + 2^-(j + e/8)).
bool ratio_within(i64 ly, i64 lx, i64 R, int j, int eighths, bool strict);

bool check_admissible(const GeneralizedMapping& gm);
bool check_class_G(const GeneralizedMapping& gm, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                   const ParameterSet& ps);
bool check_class_H1(const GeneralizedMapping& gm, const std::vector<i64>& B, int j, const ParameterSet& ps);
bool check_class_H2(const GeneralizedMapping& gm, const std::vector<i64>& B, int j, const ParameterSet& ps);
// Marked-pair conditions: equal marked lengths, unmarked blocks longer than L_j^2 with the
// 5/4 ratio bound, and no block index marked from both sides.
bool check_marked_conditions(const MarkedPartitionPair& mpp, const std::vector<i64>& B, const std::vector<i64>& Bp,
                             int j, const ParameterSet& ps);

struct PsiMap {
    Rational n, np, s, M;  // M = margin = L_j^3 / 2
};
PsiMap build_psi(const Rational& n, const Rational& np, const Rational& s, const Rational& margin);
Rational psi_eval(const PsiMap& pm, const Rational& x);
Rational psi_inv(const PsiMap& pm, const Rational& y);

std::optional<i64> find_separating_shift(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                                         const ParameterSet& ps);

// Lazy family: member h (1-based) shifts the Y cuts with indices in [shiftFrom, shiftTo] by h - 1.
struct MappingFamily {
    MarkedPartitionPair base;
    i64 count = 0;
    std::size_t shiftFrom = 1, shiftTo = 0;
    i64 psiShift = 0;
    MarkedPartitionPair member_pair(i64 h) const;
    GeneralizedMapping member(i64 h) const;
};

MappingFamily build_G_family(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                             const ParameterSet& ps);
MappingFamily build_H1_family(i64 n, i64 np, const std::vector<i64>& B, int j, const ParameterSet& ps);

struct H2Result {
    GeneralizedMapping gm;
    MarkedPartitionPair mpp;
    i64 k = 0, r = 0, s = 0, rPrime = 0;
};
H2Result build_H2(i64 n, i64 np, const std::vector<i64>& B, int j, const ParameterSet& ps);

struct CompressSchedule {
    i64 Rj = 0, k = 0, r = 0, s = 0, plusSteps = 0;
    bool direct = false;      // (n, n') is itself a single V-step
    bool proofBound = false;  // s in [R_j^- + 1, R_j^+ - 1]
    // ((xFrom, xTo], (yFrom, yTo]) pairs; the last one is the r-by-r tail when r > 0.
    std::vector<std::pair<std::pair<i64, i64>, std::pair<i64, i64>>> pairs(std::size_t cap = 10000000) const;
};
CompressSchedule compress_embed_schedule(i64 n, i64 np, int j, const ParameterSet& ps);

// Block-level witness with level-j step constants; oracles are 0-based over sub-block positions.
std::optional<EmbedWitness> apply_mapping_embed(const GeneralizedMapping& gm, const EmbedOracles& o, int j,
                                                const ParameterSet& ps);

}  // namespace mse

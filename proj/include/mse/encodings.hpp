#pragma once

#include "mse/core.hpp"
#include "mse/deciders.hpp"
#include "mse/rembed.hpp"

namespace mse {

// Y-alphabet indices of the Lipschitz reduction: "0", "1", "*".
enum class StarClass { ZERO = 0, ONE = 1, STAR = 2 };
const char* star_class_name(StarClass c);

i64 flip_count(const Bits& Z);
StarClass classify_word(const Bits& Z, i64 R);

// X alphabet {0,1} uniform; Y alphabet {0,1,*} with the exact word-class masses for length M0.
ProblemSpec lipschitz_spec(int M0, i64 R);
std::pair<SymbolSeq, SymbolSeq> encode_lipschitz(const Bits& Xstar, const Bits& Ystar, int M0, i64 R);

struct LipschitzDecode {
    LipschitzMap map;      // map.M = M, map.firstMax = floor(M/2)
    i64 Machieved = 0;     // largest consecutive gap of φ
    i64 phi1 = 0;          // φ(1)
    i64 maxBoundaryGap = 0;  // largest distance from a segment end to its nearest image
    i64 M = 1;             // max(Machieved, 2 φ(1), 3 maxBoundaryGap, 1)
};

LipschitzDecode decode_lipschitz(const Bits& Xstar, const Bits& Ystar, int M0, i64 R, const EmbedWitness& w);

// ---------------------------------------------------------------- gap classes

// Class of a gap of L zeros: 0 for L=0, else floor(log2 L) + 1.
int gap_class(i64 L);
// Points must be strictly increasing and start at 0; the last point terminates the final gap.
SymbolSeq gap_encode(const std::vector<i64>& points);
// Minimal point set realising a class sequence (gap 2^(j-1) for C_j, j >= 1).
std::vector<i64> gap_realize(const SymbolSeq& classes);

// mu(C_0)=1/2, mu(C_j)=(1/2)^(2^(j-1)) - (1/2)^(2^j). Table holds C_0..C_K, the rule covers the rest.
ProblemSpec roughiso_spec(int M0, int K = -1);
Rational gap_class_mass(int j);

struct RoughIsoConstants {
    Rational M, D, C;
};
RoughIsoConstants roughiso_constants(int M0, i64 R);

// Every point of block r goes to the first Y point of its partner block; the terminal point to the terminal point.
RoughIsoMap decode_roughiso(const std::vector<i64>& pointsX, const std::vector<i64>& pointsY,
                            const EmbedWitness& w, int M0, i64 R);

// ---------------------------------------------------------------- compatible sequences

// Deleted indices carry 0 and surviving aligned pairs differ.
bool deletion_conditions_hold(const Bits& X, const Bits& Y, const DeletionSets& d);
DeletionSets decode_compatible(const Bits& X, const Bits& Y, const EmbedWitness& w, i64 R);

}  // namespace mse

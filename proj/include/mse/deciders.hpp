#pragma once

#include "mse/core.hpp"

#include <map>
#include <optional>

namespace mse {

using Bits = std::vector<int>;

// ---------------------------------------------------------------- Lipschitz

struct LipschitzMap {
    std::vector<i64> phi;  // 1-based positions in Y, phi[i-1] = φ(i)
    i64 M = 1;
    i64 firstMax = 1;
};

// Checks 1 <= φ(i)-φ(i-1) <= M, 1 <= φ(1) <= firstMax, φ(n) <= |Y| and X_i = Y_φ(i).
bool lipschitz_map_valid(const Bits& X, const Bits& Y, const LipschitzMap& m);

// Leftmost valid map: each φ(i) is the smallest value that still extends to a full map.
std::optional<LipschitzMap> lipschitz_embed_greedy(const Bits& X, const Bits& Y, i64 M, i64 firstMax);
// |X| <= 8, |Y| <= 16.
bool lipschitz_embed_bruteforce(const Bits& X, const Bits& Y, i64 M, i64 firstMax);

// ---------------------------------------------------------------- compatibility

struct DeletionSets {
    std::vector<i64> D, Dprime;  // 1-based deleted indices
    bool operator==(const DeletionSets&) const = default;
};

// Deleted indices carry 0, and after deletion no aligned index (up to the shorter length) is 1 in both.
bool compatible_check(const Bits& X, const Bits& Y, const DeletionSets& d);

std::optional<DeletionSets> compatible_decide(const Bits& X, const Bits& Y);
// |X|, |Y| <= 10.
bool compatible_bruteforce(const Bits& X, const Bits& Y);

// ---------------------------------------------------------------- rough isometry

struct RoughIsoMap {
    std::map<i64, i64> assignment;
    Rational M{1}, D{0}, C{0};
};

// Throws ContractError if the image leaves B or the map misses a point of A.
bool rough_iso_verify(const std::vector<i64>& A, const std::vector<i64>& B, const RoughIsoMap& T);

// |A|, |B| <= 10. Non-monotone search additionally needs |B|^|A| <= 1e7.
std::optional<RoughIsoMap> rough_iso_search(const std::vector<i64>& A, const std::vector<i64>& B,
                                            const Rational& M, const Rational& D, const Rational& C,
                                            bool monotoneOnly = true);

}  // namespace mse

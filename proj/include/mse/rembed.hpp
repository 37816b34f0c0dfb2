#pragma once

#include "mse/core.hpp"

#include <functional>
#include <optional>

namespace mse {

struct StepConstants {
    i64 R0 = 2;      // jump length on the jumping side
    i64 R0minus = 1;
    i64 R0plus = 3;  // partner length range [R0minus, R0plus]
};

// Level-0 constants: (2R, 1, 3R^2).
StepConstants step_constants(i64 R);
// Level-j constants (R_j, R_j^-, R_j^+).
StepConstants step_constants(const ScaleRecord& s);

// Items are addressed by 0-based position in X and Y.
struct EmbedOracles {
    std::function<bool(i64, i64)> pairEmbed;
    std::function<bool(i64)> goodX;
    std::function<bool(i64)> goodY;
    StepConstants c;
};

struct EmbedWitness {
    std::vector<i64> iSeq;
    std::vector<i64> iPrimeSeq;
    bool operator==(const EmbedWitness&) const = default;
};

enum class StepKind { Paired, XJump, YJump, Invalid };
StepKind step_kind(i64 dx, i64 dy, const StepConstants& c);

inline constexpr double kDefaultWorkCap = 4e9;

// Finite relation X[1,n] -> Y[1,n'] with both partitions ending at (n, n').
// Returns the lexicographically smallest step sequence (paired < X-jump < Y-jump, then smaller t).
std::optional<EmbedWitness> rembed_decide(i64 n, i64 nPrime, const EmbedOracles& o,
                                          double workCap = kDefaultWorkCap);
bool rembed_verify(i64 n, i64 nPrime, const EmbedWitness& w, const EmbedOracles& o);
// Exhaustive step enumeration without memoisation; n, n' <= 12.
bool rembed_bruteforce(i64 n, i64 nPrime, const EmbedOracles& o);

// Oracles backed by a ProblemSpec over concrete symbol sequences (kept by reference).
EmbedOracles symbol_oracles(const ProblemSpec& spec, const SymbolSeq& X, const SymbolSeq& Y,
                            const StepConstants& c);

std::optional<EmbedWitness> rembed_decide(const SymbolSeq& X, const SymbolSeq& Y, const ProblemSpec& spec,
                                          const StepConstants& c, double workCap = kDefaultWorkCap);

}  // namespace mse

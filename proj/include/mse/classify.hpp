#pragma once

#include "mse/blocks.hpp"
#include "mse/core.hpp"
#include "mse/rembed.hpp"

#include <functional>

namespace mse {

enum class Tri { No = 0, Yes = 1, Unknown = 2 };
const char* tri_name(Tri t);

struct ProbInterval {
    Rational lo{0}, hi{1};
    std::string method = "exact-truncated";  // or "monte-carlo"
    i64 trials = 0;
    i64 successes = 0;
    double halfWidth = 0;
    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
};

// 95% Clopper-Pearson interval for k successes in n trials.
ProbInterval clopper_pearson(i64 k, i64 n);

struct WeightedBlock {
    SymbolSeq chars;  // level-1 blocks keep level-0 sub-blocks implicit (one per character)
    Rational prob;
};

struct BlockDistribution {
    int level = 0;
    Side side = Side::X;
    std::vector<WeightedBlock> entries;
    Rational massDeficit{0};
    i64 maxLengthEnumerated = 0;
};

struct EnumCaps {
    int maxBad = 2;             // bad sub-blocks per enumerated block
    i64 maxStates = 2000000;    // enumerated configurations
    i64 maxLength = 100000;     // sub-blocks per block
};

// Level 0 returns mu verbatim (deficit = tail); level 1 enumerates blocks by ascending length
// with exact probabilities until the deficit is at most epsilon.
BlockDistribution enumerate_block_distribution(int j, const ParameterSet& ps, const ProblemSpec& spec, Side side,
                                               const Rational& epsilon, const EnumCaps& caps = {});

// Visits every level-1 block of N characters with at most maxBad bad characters and positive probability,
// with its exact probability; stops early when `visit` returns false. Returns the number visited.
i64 for_each_level1_block(i64 N, const ParameterSet& ps, const ProblemSpec& spec, Side side, int maxBad,
                          const std::function<bool(const SymbolSeq&, const Rational&)>& visit);

// Exact probability of an enumerated level-1 block under the construction law (zero if not a block).
Rational level1_block_probability(const SymbolSeq& chars, const ParameterSet& ps, const ProblemSpec& spec, Side side);

// X -> Y on characters with level-0 constants; pairs whose lengths differ by more than a factor 2R are rejected
// without running the decider (no step sequence can bridge them).
bool chars_embed(const ProblemSpec& spec, const SymbolSeq& X, const SymbolSeq& Y, i64 R);
bool lengths_compatible(i64 nx, i64 ny, i64 R);

using PartnerOracle = std::function<bool(const SymbolSeq& partner)>;

// lo = mass of partners accepted by the oracle, hi = lo + deficit.
ProbInterval embedding_prob_exact(const BlockDistribution& partners, const PartnerOracle& embeds);
// S_j of a block on `side` against the other side's distribution, using chars_embed in the right direction.
ProbInterval embedding_prob_exact(const SymbolSeq& block, Side side, const BlockDistribution& partners,
                                  const ProblemSpec& spec, i64 R);

ProbInterval embedding_prob_mc(const BlockSampler& partnerSampler, const PartnerOracle& embeds, i64 trials,
                               Rng& rng);

// 1 - 1/(20 k0 R_{j+1}^+)
Rational semibad_threshold(const ParameterSet& ps, int j);
// 1 - 1/(10 k0 R_{j+1}^+)
Rational strong_fraction(const ParameterSet& ps, int j);

// Yes iff not good, S >= threshold, |X| <= 10 L_j and every symbol index <= L_j^m; Unknown when the
// threshold lies in (S.lo, S.hi] and the other conditions hold.
Tri is_semibad(const SymbolSeq& X, bool isGood, int j, const ParameterSet& ps, const ProbInterval& S);

// For every semi-bad partner X: #{i : X -> window_i} * 10k0R^+ >= n (10k0R^+ - 1).
// `embeds(k, i)` tells whether semi-bad entry k embeds with window entry i.
bool is_strong(std::size_t windowSize, std::size_t semibadCount, const std::function<bool(std::size_t, std::size_t)>& embeds,
               int j, const ParameterSet& ps, bool semibadComplete);

enum class SubStatus { Good, SemiBad, Bad, Unknown };

struct GoodContext {
    std::vector<SubStatus> status;  // one per level-j sub-block
    // Whether the window of `len` sub-blocks starting at `from` (0-based) is strong.
    std::function<bool(std::size_t from, std::size_t len)> windowStrong;
};

struct GoodReport {
    bool good = false;
    i64 badCount = 0;
    bool allBadSemibad = true;
    bool windowsStrong = true;
    bool lengthOk = true;
    std::string failed;  // first failing condition, empty when good
};

// Level-(j1) goodness from level-(j1-1) sub-block data.
GoodReport is_good(std::size_t n, int j1, const ParameterSet& ps, const GoodContext& ctx);

// Level-0 helpers: status of a symbol and S_0 against the other side's mu.
ProbInterval symbol_S0(const ProblemSpec& spec, Side side, int sym);
SubStatus symbol_status(const ProblemSpec& spec, Side side, int sym, const ParameterSet& ps);
// Semi-bad symbols of one side over the tabulated alphabet.
std::vector<int> semibad_symbols(const ProblemSpec& spec, Side side, const ParameterSet& ps);

// Level-1 goodness of a character block using level-0 statuses and the other side's level-0 semi-bad symbols.
GoodReport is_good_level1(const SymbolSeq& chars, Side side, const ProblemSpec& spec, const ParameterSet& ps);

}  // namespace mse

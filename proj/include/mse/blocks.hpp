#pragma once

#include "mse/core.hpp"

#include <functional>
#include <optional>

namespace mse {

struct Block {
    int level = 0;
    i64 start = 0;                // character offset in the source sequence
    SymbolSeq chars;              // characters spanned by the block
    std::vector<Block> subs;      // level-1 sub-blocks, empty at level 0
    std::vector<char> subGood;    // goodness of each sub-block, as seen during construction
    std::optional<i64> W;         // geometric draw (unset for enumerated blocks)
    std::optional<i64> T;         // l - L^3 - L^(alpha-1)
    bool first = false;           // leftmost block of its sequence

    i64 length() const { return static_cast<i64>(chars.size()); }
    i64 end() const { return start + length(); }
    // Character offsets (relative to start) where sub-blocks begin, followed by length().
    std::vector<i64> sub_boundaries() const;
};

i64 block_length(const Block& b);
Block level0_block(int symbol, i64 start = 0);
// Assemble a level-(j+1) block from consecutive level-j blocks.
Block make_block(int level, std::vector<Block> subs, i64 start = 0);
bool same_content(const Block& a, const Block& b);

using GoodOracle = std::function<bool(const Block&)>;
// Yields an independent level-j block; the flag asks for the good-conditioned law.
using BlockSampler = std::function<Block(bool goodConditioned, Rng&)>;

// Level-0 sampler drawing symbols from mu (gap-class specs sample the geometric gap directly).
int sample_symbol(const ProblemSpec& spec, Side side, Rng& rng);
BlockSampler symbol_sampler(const ProblemSpec& spec, Side side);
GoodOracle symbol_good(const ProblemSpec& spec, Side side);

struct BlockShape {
    i64 L3 = 0;      // L_j^3
    i64 Lam1 = 0;    // L_j^(alpha-1)
    double p = 1;    // L_j^-4
};
BlockShape block_shape(const ParameterSet& ps, int j);

inline constexpr i64 kDefaultScanHorizon = 1000000;

// Level-(j1) block from independent level-(j1-1) sub-blocks: the first L^3 good-conditioned,
// then W ~ Geom(L^-4) on {0,1,...}, then the first run of 2L^3 good sub-blocks, ending at its midpoint.
// A set forcedW replaces the geometric draw (degenerate-law experiments).
Block sample_block(int j1, const BlockSampler& sampler, const GoodOracle& good, const ParameterSet& ps, Rng& rng,
                   i64 horizon = kDefaultScanHorizon, std::optional<i64> forcedW = std::nullopt);

// Sampler of level-j blocks built recursively from a level-0 sampler; good-conditioned draws use rejection.
BlockSampler level_sampler(int j, const BlockSampler& base, const std::vector<GoodOracle>& goodByLevel,
                           const ParameterSet& ps, i64 horizon = kDefaultScanHorizon, i64 maxRejections = 1000000);

struct BlockHierarchy {
    std::vector<std::vector<Block>> levels;  // levels[0] = characters
};

// goodByLevel[j] classifies level-j blocks for j < J. W draws come from wStream.
BlockHierarchy partition_sequence(const SymbolSeq& chars, const ParameterSet& ps, int J,
                                  const std::vector<GoodOracle>& goodByLevel, Rng& wStream);

// Observation-style structural check: last L^3 sub-blocks good, first L^3 good unless leftmost.
bool end_goodness_holds(const Block& b, const ParameterSet& ps);

}  // namespace mse

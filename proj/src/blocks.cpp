#include "mse/blocks.hpp"

#include "mse/encodings.hpp"

#include <cmath>

namespace mse {

std::vector<i64> Block::sub_boundaries() const {
    std::vector<i64> out;
    i64 off = 0;
    for (const auto& s : subs) {
        out.push_back(off);
        off += s.length();
    }
    out.push_back(length());
    return out;
}

i64 block_length(const Block& b) { return b.length(); }

Block level0_block(int symbol, i64 start) {
    Block b;
    b.level = 0;
    b.start = start;
    b.chars = {symbol};
    return b;
}

namespace {

void rebase(Block& b, i64 start) {
    const i64 shift = start - b.start;
    b.start = start;
    for (auto& s : b.subs) rebase(s, s.start + shift);
}

}  // namespace

Block make_block(int level, std::vector<Block> subs, i64 start) {
    Block b;
    b.level = level;
    b.start = start;
    i64 off = start;
    for (auto& s : subs) {
        if (s.level != level - 1) throw ContractError("make_block: sub-block level mismatch");
        rebase(s, off);
        off += s.length();
        b.chars.insert(b.chars.end(), s.chars.begin(), s.chars.end());
    }
    b.subs = std::move(subs);
    return b;
}

bool same_content(const Block& a, const Block& b) {
    if (a.level != b.level || a.chars != b.chars || a.subs.size() != b.subs.size()) return false;
    for (std::size_t i = 0; i < a.subs.size(); ++i)
        if (!same_content(a.subs[i], b.subs[i])) return false;
    return true;
}

int sample_symbol(const ProblemSpec& spec, Side side, Rng& rng) {
    if (spec.gapM0) return gap_class(rng.geometric(0.5));
    const auto& mu = spec.mu(side);
    double u = rng.uniform();
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const double p = to_double(mu[k]);
        if (u < p) return static_cast<int>(k);
        u -= p;
    }
    if (spec.tail(side) > 0) throw ContractError("sample_symbol: spec has untabulated mass and no tail rule");
    for (std::size_t k = mu.size(); k-- > 0;)
        if (mu[k] > 0) return static_cast<int>(k);
    throw ContractError("sample_symbol: spec has no mass");
}

BlockSampler symbol_sampler(const ProblemSpec& spec, Side side) {
    return [spec, side](bool cond, Rng& rng) {
        for (int tries = 0; tries < 1000000; ++tries) {
            const int s = sample_symbol(spec, side, rng);
            if (!cond || spec.good(side, s)) return level0_block(s);
        }
        throw ResourceError("symbol_sampler: good symbols too rare for rejection sampling");
    };
}

GoodOracle symbol_good(const ProblemSpec& spec, Side side) {
    return [spec, side](const Block& b) { return spec.good(side, b.chars.at(0)); };
}

BlockShape block_shape(const ParameterSet& ps, int j) {
    const auto s = scales(ps, j);
    BlockShape sh;
    const BigInt L3 = pow_int(s.L, 3);
    sh.L3 = to_i64(L3, "L_j^3");
    sh.Lam1 = to_i64(pow_int(s.L, static_cast<unsigned long>(ps.alpha - 1)), "L_j^(alpha-1)");
    sh.p = 1.0 / std::pow(to_double(Rational(s.L)), 4.0);
    return sh;
}

Block sample_block(int j1, const BlockSampler& sampler, const GoodOracle& good, const ParameterSet& ps, Rng& rng,
                   i64 horizon, std::optional<i64> forcedW) {
    if (j1 < 1) throw ContractError("sample_block: target level must be >= 1");
    const BlockShape sh = block_shape(ps, j1 - 1);
    std::vector<Block> subs;
    std::vector<char> g;
    auto draw = [&](bool cond) {
        subs.push_back(sampler(cond, rng));
        g.push_back(good(subs.back()) ? 1 : 0);
    };
    for (i64 k = 0; k < sh.L3; ++k) draw(true);
    if (forcedW && *forcedW < 0) throw ContractError("sample_block: forced W must be >= 0");
    const i64 W = forcedW ? *forcedW : rng.geometric(sh.p);
    const i64 s0 = sh.L3 + sh.Lam1 + W;
    while (static_cast<i64>(subs.size()) < s0) draw(false);
    i64 run = 0, k = s0;
    while (run < 2 * sh.L3) {
        if (k - s0 >= horizon)
            throw ResourceError("sample_block: no run of " + std::to_string(2 * sh.L3) + " good sub-blocks within " +
                                std::to_string(horizon) + " sub-blocks; good sub-blocks too rare");
        ++k;
        if (static_cast<i64>(subs.size()) < k) draw(false);
        run = g[k - 1] ? run + 1 : 0;
    }
    const i64 l = k - 2 * sh.L3;
    subs.resize(static_cast<std::size_t>(l + sh.L3));
    g.resize(subs.size());
    Block b = make_block(j1, std::move(subs));
    b.subGood = std::move(g);
    b.W = W;
    b.T = l - sh.L3 - sh.Lam1;
    b.first = false;
    return b;
}

BlockSampler level_sampler(int j, const BlockSampler& base, const std::vector<GoodOracle>& goodByLevel,
                           const ParameterSet& ps, i64 horizon, i64 maxRejections) {
    if (j == 0) return base;
    if (static_cast<int>(goodByLevel.size()) < j) throw ContractError("level_sampler: missing good oracles");
    BlockSampler lower = level_sampler(j - 1, base, goodByLevel, ps, horizon, maxRejections);
    GoodOracle goodLower = goodByLevel[j - 1];
    GoodOracle goodHere = static_cast<int>(goodByLevel.size()) > j ? goodByLevel[j] : GoodOracle{};
    return [=](bool cond, Rng& rng) {
        for (i64 t = 0; t < maxRejections; ++t) {
            Block b = sample_block(j, lower, goodLower, ps, rng, horizon);
            if (!cond) return b;
            if (!goodHere) throw ContractError("level_sampler: good-conditioned draw without a level oracle");
            if (goodHere(b)) return b;
        }
        throw ResourceError("level_sampler: good level-" + std::to_string(j) + " blocks too rare for rejection");
    };
}

BlockHierarchy partition_sequence(const SymbolSeq& chars, const ParameterSet& ps, int J,
                                  const std::vector<GoodOracle>& goodByLevel, Rng& wStream) {
    if (J < 0) throw ContractError("partition_sequence: negative level");
    if (static_cast<int>(goodByLevel.size()) < J) throw ContractError("partition_sequence: missing good oracles");
    BlockHierarchy h;
    h.levels.emplace_back();
    for (std::size_t i = 0; i < chars.size(); ++i) h.levels[0].push_back(level0_block(chars[i], i64(i)));
    for (int lvl = 0; lvl < J; ++lvl) {
        const auto& below = h.levels[lvl];
        const BlockShape sh = block_shape(ps, lvl);
        std::vector<char> g(below.size());
        for (std::size_t i = 0; i < below.size(); ++i) g[i] = goodByLevel[lvl](below[i]) ? 1 : 0;
        std::vector<Block> above;
        const i64 N = static_cast<i64>(below.size());
        i64 m = 0;
        while (true) {
            const i64 W = wStream.geometric(sh.p);
            const i64 s0 = sh.L3 + sh.Lam1 + W;
            i64 run = 0, k = s0, l = -1;
            while (m + k < N) {
                ++k;
                run = g[m + k - 1] ? run + 1 : 0;
                if (run == 2 * sh.L3) {
                    l = k - 2 * sh.L3;
                    break;
                }
            }
            if (l < 0) break;
            std::vector<Block> subs(below.begin() + m, below.begin() + m + l + sh.L3);
            Block b = make_block(lvl + 1, std::move(subs), below[m].start);
            b.subGood.assign(g.begin() + m, g.begin() + m + l + sh.L3);
            b.W = W;
            b.T = l - sh.L3 - sh.Lam1;
            b.first = above.empty();
            above.push_back(std::move(b));
            m += l + sh.L3;
        }
        if (above.empty())
            throw ResourceError("partition_sequence: " + std::to_string(chars.size()) +
                                " characters do not complete one level-" + std::to_string(lvl + 1) + " block");
        h.levels.push_back(std::move(above));
    }
    return h;
}

bool end_goodness_holds(const Block& b, const ParameterSet& ps) {
    if (b.level < 1) return true;
    const i64 L3 = block_shape(ps, b.level - 1).L3;
    const i64 n = static_cast<i64>(b.subGood.size());
    if (n != static_cast<i64>(b.subs.size()) || n < L3) return false;
    for (i64 k = n - L3; k < n; ++k)
        if (!b.subGood[k]) return false;
    if (!b.first)
        for (i64 k = 0; k < L3; ++k)
            if (!b.subGood[k]) return false;
    return true;
}

}  // namespace mse

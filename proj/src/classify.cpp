#include "mse/classify.hpp"

#include "mse/encodings.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <map>

namespace mse {

const char* tri_name(Tri t) {
    switch (t) {
        case Tri::No: return "no";
        case Tri::Yes: return "yes";
        default: return "unknown";
    }
}

ProbInterval clopper_pearson(i64 k, i64 n) {
    if (n < 1 || k < 0 || k > n) throw ContractError("clopper_pearson: need 0 <= k <= n, n >= 1");
    ProbInterval iv;
    iv.method = "monte-carlo";
    iv.trials = n;
    iv.successes = k;
    const double a = 0.025;
    const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(double(k), double(n - k + 1), a);
    const double hi = k == n ? 1.0 : boost::math::ibeta_inv(double(k + 1), double(n - k), 1 - a);
    iv.lo = from_double(lo);
    iv.hi = from_double(hi);
    iv.halfWidth = (hi - lo) / 2;
    return iv;
}

namespace {

Rational rpow(const Rational& x, unsigned long e) {
    return Rational(pow_int(numerator(x), e), pow_int(denominator(x), e));
}

struct Level1Law {
    i64 L3, Lam1;
    Rational q;  // 1 - p
};

Level1Law level1_law(const ParameterSet& ps) {
    const auto s = scales(ps, 0);
    Level1Law law;
    law.L3 = to_i64(pow_int(s.L, 3), "L^3");
    law.Lam1 = to_i64(pow_int(s.L, static_cast<unsigned long>(ps.alpha - 1)), "L^(alpha-1)");
    const BigInt L4 = pow_int(s.L, 4);
    law.q = Rational(L4 - 1, L4);
    return law;
}

// Smallest scan start i such that every window (i', i'+2L^3] with i <= i' <= N-L^3-1 holds a bad position.
// `bads` are 1-based positions in descending order.
i64 scan_floor(i64 N, i64 L3, const std::vector<i64>& badsDesc) {
    i64 need = N - L3 - 1;
    for (i64 p : badsDesc) {
        if (p - 1 < need) break;
        need = std::min(need, p - 2 * L3 - 1);
    }
    return need + 1;
}

// Range [a, b] of W values producing this block, or a > b.
std::pair<i64, i64> w_range(i64 N, const Level1Law& law, const std::vector<i64>& badsDesc) {
    const i64 iStar = scan_floor(N, law.L3, badsDesc);
    const i64 a = std::max<i64>(0, iStar - law.L3 - law.Lam1);
    const i64 b = N - 2 * law.L3 - law.Lam1;
    return {a, b};
}


}  // namespace

Rational level1_block_probability(const SymbolSeq& chars, const ParameterSet& ps, const ProblemSpec& spec, Side side) {
    const Level1Law law = level1_law(ps);
    const i64 N = static_cast<i64>(chars.size());
    if (N < 2 * law.L3 + law.Lam1) return 0;
    const auto& mu = spec.mu(side);
    std::vector<i64> bads;
    Rational prod = 1;
    for (i64 i = N; i >= 1; --i) {
        const int c = chars[static_cast<std::size_t>(i - 1)];
        if (c < 0 || c >= static_cast<int>(mu.size())) return 0;
        prod *= mu[static_cast<std::size_t>(c)];
        if (!spec.good(side, c)) {
            if (i <= law.L3 || i > N - law.L3) return 0;
            bads.push_back(i);
        }
    }
    const auto [a, b] = w_range(N, law, bads);
    if (a > b) return 0;
    return (rpow(law.q, static_cast<unsigned long>(a)) - rpow(law.q, static_cast<unsigned long>(b + 1))) * prod;
}

i64 for_each_level1_block(i64 N, const ParameterSet& ps, const ProblemSpec& spec, Side side, int maxBad,
                          const std::function<bool(const SymbolSeq&, const Rational&)>& visit) {
    const Level1Law law = level1_law(ps);
    if (N < 2 * law.L3 + law.Lam1) return 0;
    const auto& mu = spec.mu(side);
    std::vector<int> G, B;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu[k] <= 0) continue;
        (spec.good(side, static_cast<int>(k)) ? G : B).push_back(static_cast<int>(k));
    }
    if (G.empty()) throw ContractError("for_each_level1_block: no good symbol carries mass");

    std::map<std::pair<int, i64>, Rational> powCache;
    auto mupow = [&](int sym, i64 c) -> const Rational& {
        const auto key = std::make_pair(sym, c);
        auto it = powCache.find(key);
        if (it == powCache.end())
            it = powCache.emplace(key, rpow(mu[static_cast<std::size_t>(sym)], static_cast<unsigned long>(c))).first;
        return it->second;
    };
    std::map<i64, Rational> qCache;
    auto qa = [&](i64 e) -> const Rational& {
        auto it = qCache.find(e);
        if (it == qCache.end()) it = qCache.emplace(e, rpow(law.q, static_cast<unsigned long>(e))).first;
        return it->second;
    };
    i64 visited = 0;
    const i64 lo = law.L3 + 1, hi = N - law.L3;  // interior positions, 1-based
    const i64 interior = hi - lo + 1;
    for (int k = 0; k <= maxBad && k <= interior; ++k) {
        // positions in ascending order, odometer over combinations
        std::vector<i64> pos(static_cast<std::size_t>(k));
        for (int t = 0; t < k; ++t) pos[t] = lo + t;
        while (true) {
            std::vector<i64> desc(pos.rbegin(), pos.rend());
            const auto [a, b] = w_range(N, law, desc);
            if (a <= b) {
                const Rational wmass = qa(a) - qa(b + 1);
                // bad symbol choices x good symbol choices
                std::vector<std::size_t> bsel(static_cast<std::size_t>(k), 0);
                const i64 ngood = N - k;
                std::vector<std::size_t> gsel(G.size() > 1 ? static_cast<std::size_t>(ngood) : 0, 0);
                while (true) {
                    SymbolSeq chars(static_cast<std::size_t>(N), G[0]);
                    std::map<int, i64> counts;
                    std::size_t gi = 0;
                    std::size_t bi = 0;
                    for (i64 i = 1; i <= N; ++i) {
                        int sym;
                        if (bi < pos.size() && pos[bi] == i) sym = B[bsel[bi++]];
                        else sym = G.size() > 1 ? G[gsel[gi++]] : G[0];
                        chars[static_cast<std::size_t>(i - 1)] = sym;
                        ++counts[sym];
                    }
                    Rational pr = wmass;
                    for (const auto& [sym, c] : counts) pr *= mupow(sym, c);
                    ++visited;
                    if (!visit(chars, pr)) return visited;
                    // advance good odometer, then bad odometer
                    std::size_t t = 0;
                    for (; t < gsel.size(); ++t) {
                        if (++gsel[t] < G.size()) break;
                        gsel[t] = 0;
                    }
                    if (t < gsel.size()) continue;
                    for (t = 0; t < bsel.size(); ++t) {
                        if (++bsel[t] < B.size()) break;
                        bsel[t] = 0;
                    }
                    if (t == bsel.size()) break;
                }
            }
            // next combination
            int t = k - 1;
            while (t >= 0 && pos[t] == hi - (k - 1 - t)) --t;
            if (t < 0) break;
            ++pos[t];
            for (int u = t + 1; u < k; ++u) pos[u] = pos[u - 1] + 1;
        }
        if (B.empty()) break;
    }
    return visited;
}

BlockDistribution enumerate_block_distribution(int j, const ParameterSet& ps, const ProblemSpec& spec, Side side,
                                               const Rational& epsilon, const EnumCaps& caps) {
    BlockDistribution d;
    d.level = j;
    d.side = side;
    const auto& mu = spec.mu(side);
    if (j == 0) {
        for (std::size_t k = 0; k < mu.size(); ++k)
            if (mu[k] > 0) d.entries.push_back({SymbolSeq{static_cast<int>(k)}, mu[k]});
        d.massDeficit = spec.tail(side);
        d.maxLengthEnumerated = 1;
        return d;
    }
    if (j != 1) throw ResourceError("enumerate_block_distribution: enumeration is available for levels 0 and 1");

    const Level1Law law = level1_law(ps);
    Rational total = 0;
    i64 states = 0;
    for (i64 N = 2 * law.L3 + law.Lam1;; ++N) {
        if (N > caps.maxLength)
            throw ResourceError("enumerate_block_distribution: length cap " + std::to_string(caps.maxLength) +
                                " reached with deficit " + to_string(1 - total));
        for_each_level1_block(N, ps, spec, side, caps.maxBad, [&](const SymbolSeq& chars, const Rational& pr) {
            if (++states > caps.maxStates)
                throw ResourceError("enumerate_block_distribution: state cap " + std::to_string(caps.maxStates) +
                                    " reached with deficit " + to_string(1 - total));
            total += pr;
            d.entries.push_back({chars, pr});
            return true;
        });
        d.maxLengthEnumerated = N;
        if (1 - total <= epsilon) break;
    }
    d.massDeficit = 1 - total;
    return d;
}

bool lengths_compatible(i64 nx, i64 ny, i64 R) { return ny <= 2 * R * nx && nx <= 2 * R * ny; }

bool chars_embed(const ProblemSpec& spec, const SymbolSeq& X, const SymbolSeq& Y, i64 R) {
    if (!lengths_compatible(static_cast<i64>(X.size()), static_cast<i64>(Y.size()), R)) return false;
    return rembed_decide(X, Y, spec, step_constants(R)).has_value();
}

ProbInterval embedding_prob_exact(const BlockDistribution& partners, const PartnerOracle& embeds) {
    ProbInterval iv;
    iv.lo = 0;
    for (const auto& e : partners.entries)
        if (embeds(e.chars)) iv.lo += e.prob;
    iv.hi = iv.lo + partners.massDeficit;
    if (iv.hi > 1) iv.hi = 1;
    return iv;
}

ProbInterval embedding_prob_exact(const SymbolSeq& block, Side side, const BlockDistribution& partners,
                                  const ProblemSpec& spec, i64 R) {
    if (partners.side != other(side)) throw ContractError("embedding_prob_exact: partner distribution on the wrong side");
    if (side == Side::X)
        return embedding_prob_exact(partners, [&](const SymbolSeq& y) { return chars_embed(spec, block, y, R); });
    return embedding_prob_exact(partners, [&](const SymbolSeq& x) { return chars_embed(spec, x, block, R); });
}

ProbInterval embedding_prob_mc(const BlockSampler& partnerSampler, const PartnerOracle& embeds, i64 trials,
                               Rng& rng) {
    if (trials < 1) throw ContractError("embedding_prob_mc: trials must be >= 1");
    i64 k = 0;
    for (i64 t = 0; t < trials; ++t)
        if (embeds(partnerSampler(false, rng).chars)) ++k;
    return clopper_pearson(k, trials);
}

namespace {

BigInt strong_factor(const ParameterSet& ps, int j) { return 10 * BigInt(ps.k0) * scales(ps, j + 1).Rplus; }

// k <= L^m without materialising L^m when it is astronomically large.
bool index_within(i64 k, const BigInt& L, i64 m) {
    if (k <= 1) return true;
    const std::size_t bits = msb(L) + 1;
    if ((bits - 1) * static_cast<std::size_t>(m) >= 63) return true;
    return BigInt(k) <= pow_int(L, static_cast<unsigned long>(m));
}

}  // namespace

Rational semibad_threshold(const ParameterSet& ps, int j) {
    return 1 - Rational(BigInt(1), 2 * strong_factor(ps, j));
}

Rational strong_fraction(const ParameterSet& ps, int j) { return 1 - Rational(BigInt(1), strong_factor(ps, j)); }

Tri is_semibad(const SymbolSeq& X, bool isGood, int j, const ParameterSet& ps, const ProbInterval& S) {
    if (isGood) return Tri::No;
    const auto s = scales(ps, j);
    if (BigInt(static_cast<i64>(X.size())) > 10 * s.L) return Tri::No;
    for (int c : X)
        if (!index_within(c, s.L, ps.m)) return Tri::No;
    const Rational th = semibad_threshold(ps, j);
    if (S.lo >= th) return Tri::Yes;
    if (S.hi >= th) return Tri::Unknown;
    return Tri::No;
}

bool is_strong(std::size_t windowSize, std::size_t semibadCount,
               const std::function<bool(std::size_t, std::size_t)>& embeds, int j, const ParameterSet& ps,
               bool semibadComplete) {
    if (!semibadComplete) throw ContractError("is_strong: semi-bad list is incomplete");
    const BigInt F = strong_factor(ps, j);
    const BigInt need = BigInt(static_cast<i64>(windowSize)) * (F - 1);
    for (std::size_t k = 0; k < semibadCount; ++k) {
        i64 cnt = 0;
        for (std::size_t i = 0; i < windowSize; ++i)
            if (embeds(k, i)) ++cnt;
        if (BigInt(cnt) * F < need) return false;
    }
    return true;
}

GoodReport is_good(std::size_t n, int j1, const ParameterSet& ps, const GoodContext& ctx) {
    if (j1 < 1) throw ContractError("is_good: level must be >= 1");
    if (ctx.status.size() != n) throw ContractError("is_good: status list does not match block size");
    for (auto st : ctx.status)
        if (st == SubStatus::Unknown) throw ContractError("is_good: unresolved sub-block status");
    const auto s = scales(ps, j1 - 1);
    GoodReport r;
    const BigInt bound = pow_int(s.L, static_cast<unsigned long>(ps.alpha - 1)) + pow_int(s.L, 5);
    r.lengthOk = BigInt(static_cast<i64>(n)) <= bound;
    for (auto st : ctx.status) {
        if (st == SubStatus::Good) continue;
        ++r.badCount;
        if (st != SubStatus::SemiBad) r.allBadSemibad = false;
    }
    if (!r.lengthOk) r.failed = "length";
    else if (r.badCount > ps.k0) r.failed = "bad-count";
    else if (!r.allBadSemibad) r.failed = "bad-not-semibad";
    else {
        const BigInt w = floor_pow(s.L, 3, 2);
        if (BigInt(static_cast<i64>(n)) >= w) {
            const std::size_t ws = static_cast<std::size_t>(to_i64(w, "window"));
            for (std::size_t from = 0; from + ws <= n; ++from)
                if (!ctx.windowStrong(from, ws)) {
                    r.windowsStrong = false;
                    r.failed = "window-not-strong";
                    break;
                }
        }
    }
    r.good = r.failed.empty();
    return r;
}

ProbInterval symbol_S0(const ProblemSpec& spec, Side side, int sym) {
    ProbInterval iv;
    if (spec.gapM0) {
        const int M0 = *spec.gapM0;
        Rational sum = 0;
        for (int k = std::max(0, sym - M0); k <= sym + M0; ++k) sum += gap_class_mass(k);
        iv.lo = iv.hi = sum;
        return iv;
    }
    const Side o = other(side);
    const auto& mu = spec.mu(o);
    Rational sum = 0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const bool rel = side == Side::X ? spec.related(sym, static_cast<int>(k)) : spec.related(static_cast<int>(k), sym);
        if (rel) sum += mu[k];
    }
    iv.lo = sum;
    iv.hi = sum + spec.tail(o);
    return iv;
}

SubStatus symbol_status(const ProblemSpec& spec, Side side, int sym, const ParameterSet& ps) {
    if (spec.good(side, sym)) return SubStatus::Good;
    switch (is_semibad(SymbolSeq{sym}, false, 0, ps, symbol_S0(spec, side, sym))) {
        case Tri::Yes: return SubStatus::SemiBad;
        case Tri::No: return SubStatus::Bad;
        default: return SubStatus::Unknown;
    }
}

std::vector<int> semibad_symbols(const ProblemSpec& spec, Side side, const ParameterSet& ps) {
    std::vector<int> out;
    for (std::size_t k = 0; k < spec.size(side); ++k) {
        const auto st = symbol_status(spec, side, static_cast<int>(k), ps);
        if (st == SubStatus::Unknown)
            throw ContractError("semibad_symbols: symbol " + std::to_string(k) + " has unresolved status");
        if (st == SubStatus::SemiBad) out.push_back(static_cast<int>(k));
    }
    return out;
}

GoodReport is_good_level1(const SymbolSeq& chars, Side side, const ProblemSpec& spec, const ParameterSet& ps) {
    GoodContext ctx;
    ctx.status.reserve(chars.size());
    for (int c : chars) ctx.status.push_back(symbol_status(spec, side, c, ps));
    const auto partners = semibad_symbols(spec, other(side), ps);
    ctx.windowStrong = [&](std::size_t from, std::size_t len) {
        return is_strong(
            len, partners.size(),
            [&](std::size_t k, std::size_t i) {
                const int c = chars[from + i];
                return side == Side::X ? spec.related(c, partners[k]) : spec.related(partners[k], c);
            },
            0, ps, true);
    };
    return is_good(chars.size(), 1, ps, ctx);
}

}  // namespace mse

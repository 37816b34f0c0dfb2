#include "mse/construct.hpp"

#include <algorithm>

namespace mse {

namespace {

void sort_lex(std::vector<WeightedBlock>& v) {
    std::sort(v.begin(), v.end(), [](const WeightedBlock& a, const WeightedBlock& b) { return a.chars < b.chars; });
}

struct Level0View {
    std::vector<SubStatus> status;  // per tabulated symbol of `side`
    std::vector<int> partnerSemibad;  // semi-bad symbols of the other side
    bool resolved = true;
};

Level0View level0_view(const ProblemSpec& spec, Side side, const ParameterSet& ps) {
    Level0View v;
    for (std::size_t k = 0; k < spec.size(side); ++k) {
        v.status.push_back(symbol_status(spec, side, static_cast<int>(k), ps));
        if (v.status.back() == SubStatus::Unknown) v.resolved = false;
    }
    const Side o = other(side);
    for (std::size_t k = 0; k < spec.size(o); ++k) {
        const auto st = symbol_status(spec, o, static_cast<int>(k), ps);
        if (st == SubStatus::Unknown) v.resolved = false;
        if (st == SubStatus::SemiBad) v.partnerSemibad.push_back(static_cast<int>(k));
    }
    return v;
}

// Level-1 goodness from a precomputed level-0 view; nullopt when a character status is unresolved.
std::optional<bool> good_level1(const SymbolSeq& chars, Side side, const ProblemSpec& spec, const ParameterSet& ps,
                                const Level0View& v) {
    GoodContext ctx;
    ctx.status.reserve(chars.size());
    for (int c : chars) {
        ctx.status.push_back(v.status[static_cast<std::size_t>(c)]);
        if (ctx.status.back() == SubStatus::Unknown) return std::nullopt;
    }
    ctx.windowStrong = [&](std::size_t from, std::size_t len) {
        return is_strong(
            len, v.partnerSemibad.size(),
            [&](std::size_t k, std::size_t i) {
                const int c = chars[from + i];
                const int p = v.partnerSemibad[k];
                return side == Side::X ? spec.related(c, p) : spec.related(p, c);
            },
            0, ps, true);
    };
    return is_good(chars.size(), 1, ps, ctx).good;
}

bool has_bad_mass(const ProblemSpec& spec, Side side) {
    const auto& mu = spec.mu(side);
    for (std::size_t k = 0; k < mu.size(); ++k)
        if (mu[k] > 0 && !spec.good(side, static_cast<int>(k))) return true;
    return false;
}

LevelCatalog level0_catalog(const ParameterSet& ps, const ProblemSpec& spec, Side side, const CatalogCaps& caps) {
    LevelCatalog cat;
    cat.level = 0;
    cat.side = side;
    cat.caps = caps;
    const auto& mu = spec.mu(side);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu[k] <= 0) continue;
        const int sym = static_cast<int>(k);
        switch (symbol_status(spec, side, sym, ps)) {
            case SubStatus::Good: cat.good.push_back({SymbolSeq{sym}, mu[k]}); break;
            case SubStatus::SemiBad: cat.semibad.push_back({SymbolSeq{sym}, mu[k]}); break;
            case SubStatus::Unknown: ++cat.unresolved; break;
            case SubStatus::Bad: break;
        }
    }
    cat.goodComplete = true;
    cat.semibadComplete = cat.unresolved == 0;
    if (spec.gapM0) {
        cat.truncatedAt = static_cast<int>(spec.size(side)) - 1;
        cat.goodComplete = cat.semibadComplete = false;
        cat.notes.push_back("gap-class alphabet truncated at symbol " + std::to_string(*cat.truncatedAt));
    }
    if (cat.unresolved) cat.notes.push_back(std::to_string(cat.unresolved) + " symbols with unresolved status");
    return cat;
}

LevelCatalog level1_catalog(const ParameterSet& ps, const ProblemSpec& spec, Side side, const CatalogCaps& caps) {
    LevelCatalog cat;
    cat.level = 1;
    cat.side = side;
    cat.caps = caps;
    const auto s0 = scales(ps, 0);
    const i64 L3 = to_i64(pow_int(s0.L, 3), "L^3");
    const i64 Lam1 = to_i64(pow_int(s0.L, static_cast<unsigned long>(ps.alpha - 1)), "L^(alpha-1)");
    const i64 Nmin = 2 * L3 + Lam1;
    const i64 goodMax = to_i64(pow_int(s0.L, static_cast<unsigned long>(ps.alpha - 1)) + pow_int(s0.L, 5),
                               "good length bound");
    const Level0View view = level0_view(spec, side, ps);
    if (spec.gapM0) {
        cat.truncatedAt = static_cast<int>(spec.size(side)) - 1;
        cat.notes.push_back("gap-class alphabet truncated at symbol " + std::to_string(*cat.truncatedAt));
    }

    // Good list: good blocks have at most k0 bad characters, so maxBad = k0 is exhaustive.
    bool goodCapped = false;
    i64 states = 0;
    i64 goodUnresolved = 0;
    for (i64 N = Nmin; N <= goodMax && !goodCapped; ++N) {
        for_each_level1_block(N, ps, spec, side, static_cast<int>(ps.k0), [&](const SymbolSeq& chars, const Rational& pr) {
            if (++states > caps.maxStates) {
                goodCapped = true;
                return false;
            }
            const auto g = good_level1(chars, side, spec, ps, view);
            if (!g) ++goodUnresolved;
            else if (*g) cat.good.push_back({chars, pr});
            return true;
        });
    }
    cat.goodComplete = !goodCapped && goodUnresolved == 0 && !spec.gapM0;
    if (goodCapped) cat.notes.push_back("good enumeration stopped at the state cap " + std::to_string(caps.maxStates));
    if (goodUnresolved) cat.notes.push_back(std::to_string(goodUnresolved) + " good candidates with unresolved characters");
    sort_lex(cat.good);

    if (!caps.semibad) {
        cat.notes.push_back("semi-bad list not requested");
        return cat;
    }

    // Semi-bad list: non-good blocks of at most 10 L_1 characters with S_1 >= threshold.
    const i64 semiMax = to_i64(10 * scales(ps, 1).L, "10 L_1");
    const Side o = other(side);
    const i64 partnerMax = std::min<i64>(caps.partnerMaxLength, caps.horizonFactor * ps.R * semiMax);
    std::vector<WeightedBlock> partners;
    bool partnerCapped = false;
    i64 pstates = 0;
    for (i64 N = Nmin; N <= partnerMax && !partnerCapped; ++N)
        for_each_level1_block(N, ps, spec, o, caps.partnerMaxBad, [&](const SymbolSeq& chars, const Rational& pr) {
            if (++pstates > caps.maxStates) {
                partnerCapped = true;
                return false;
            }
            partners.push_back({chars, pr});
            return true;
        });
    // Heaviest partners first so that either verdict is reached early.
    std::stable_sort(partners.begin(), partners.end(),
                     [](const WeightedBlock& a, const WeightedBlock& b) { return a.prob > b.prob; });
    const Rational thr = semibad_threshold(ps, 1);
    i64 checks = 0;
    bool checkCapped = false, candCapped = false;
    states = 0;
    for (i64 N = Nmin; N <= semiMax && !candCapped; ++N) {
        for_each_level1_block(N, ps, spec, side, caps.semibadMaxBad, [&](const SymbolSeq& chars, const Rational& pr) {
            if (++states > caps.maxStates) {
                candCapped = true;
                return false;
            }
            const auto g = good_level1(chars, side, spec, ps, view);
            if (!g) {
                ++cat.unresolved;
                return true;
            }
            if (*g) return true;
            const i64 h = std::min<i64>(caps.horizonFactor * ps.R * N, partnerMax);
            Rational succ = 0, fail = 0;
            for (const auto& p : partners) {
                const i64 np = static_cast<i64>(p.chars.size());
                if (np > h) continue;
                bool ok = false;
                if (lengths_compatible(N, np, ps.R)) {
                    if (++checks > caps.maxEmbedChecks) {
                        checkCapped = true;
                        break;
                    }
                    ok = side == Side::X ? chars_embed(spec, chars, p.chars, ps.R) : chars_embed(spec, p.chars, chars, ps.R);
                }
                (ok ? succ : fail) += p.prob;
                if (succ >= thr || 1 - fail < thr) break;
            }
            ProbInterval S;
            S.lo = succ;
            S.hi = 1 - fail;
            switch (is_semibad(chars, false, 1, ps, S)) {
                case Tri::Yes: cat.semibad.push_back({chars, pr}); break;
                case Tri::Unknown: ++cat.unresolved; break;
                case Tri::No: break;
            }
            return true;
        });
    }
    const bool capByBad = has_bad_mass(spec, side) && caps.semibadMaxBad < semiMax - 2 * L3;
    cat.semibadComplete = !spec.gapM0 && !candCapped && !checkCapped && cat.unresolved == 0 && !capByBad;
    if (capByBad)
        cat.notes.push_back("semi-bad candidates limited to " + std::to_string(caps.semibadMaxBad) + " bad characters");
    if (candCapped) cat.notes.push_back("semi-bad enumeration stopped at the state cap");
    if (checkCapped) cat.notes.push_back("embedding check cap " + std::to_string(caps.maxEmbedChecks) + " reached");
    if (partnerCapped) cat.notes.push_back("partner enumeration stopped at the state cap");
    if (cat.unresolved) cat.notes.push_back(std::to_string(cat.unresolved) + " semi-bad candidates unresolved");
    sort_lex(cat.semibad);
    return cat;
}

Block level1_from_chars(const SymbolSeq& chars) {
    std::vector<Block> subs;
    subs.reserve(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i) subs.push_back(level0_block(chars[i], static_cast<i64>(i)));
    return make_block(1, std::move(subs));
}

}  // namespace

LevelCatalog list_level_catalog(int j, const ParameterSet& ps, const ProblemSpec& spec, Side side,
                                const CatalogCaps& caps) {
    check_spec(spec);
    if (j == 0) return level0_catalog(ps, spec, side, caps);
    if (j == 1) return level1_catalog(ps, spec, side, caps);
    throw ResourceError("list_level_catalog: catalogs are enumerable at levels 0 and 1 only");
}

const LevelCatalog& CatalogSet::at(Side s, int j) const {
    const auto& v = s == Side::X ? X : Y;
    if (j < 0 || static_cast<std::size_t>(j) >= v.size())
        throw ContractError("CatalogSet: no catalog at level " + std::to_string(j));
    return v[static_cast<std::size_t>(j)];
}

CatalogSet build_catalogs(int maxLevel, const ParameterSet& ps, const ProblemSpec& spec, const CatalogCaps& caps) {
    CatalogSet cs;
    for (int j = 0; j <= maxLevel; ++j) {
        cs.X.push_back(list_level_catalog(j, ps, spec, Side::X, caps));
        cs.Y.push_back(list_level_catalog(j, ps, spec, Side::Y, caps));
    }
    return cs;
}

bool catalog_contains(const std::vector<WeightedBlock>& list, const SymbolSeq& chars) {
    auto it = std::lower_bound(list.begin(), list.end(), chars,
                               [](const WeightedBlock& a, const SymbolSeq& c) { return a.chars < c; });
    return it != list.end() && it->chars == chars;
}

Block extend_good_block(const SymbolSeq& xgood, int j, Side side, const ParameterSet& ps, const ProblemSpec& spec,
                        const CatalogSet& cats, std::size_t skip) {
    const LevelCatalog& own = cats.at(side, j);
    if (!own.goodComplete) throw ContractError("extend_good_block: level-" + std::to_string(j) + " good list incomplete");
    if (!catalog_contains(own.good, xgood))
        throw ContractError("extend_good_block: input is not in the level-" + std::to_string(j) + " good list");
    const auto sj = scales(ps, j);
    const i64 L3 = to_i64(pow_int(sj.L, 3), "L^3");
    const i64 Lam1 = to_i64(pow_int(sj.L, static_cast<unsigned long>(ps.alpha - 1)), "L^(alpha-1)");
    const i64 Nmin = 2 * L3 + Lam1;
    std::string lastFail = "no good filler";
    std::size_t tries = 0;

    if (j == 0) {
        const LevelCatalog& part = cats.at(other(side), 0);
        if (!part.semibadComplete) throw ContractError("extend_good_block: level-0 semi-bad list of the other side incomplete");
        const i64 goodMax = Lam1 + to_i64(pow_int(sj.L, 5), "L^5");
        // Alternatives ordered by filler symbol, then by length.
        std::size_t alt = 0;
        for (const auto& f : own.good) {
            for (i64 N = Nmin; N <= goodMax; ++N) {
                if (alt++ < skip) continue;
                if (++tries > static_cast<std::size_t>(own.caps.maxExtensionTries)) break;
                SymbolSeq chars(static_cast<std::size_t>(N), f.chars[0]);
                chars[0] = xgood[0];
                if (level1_block_probability(chars, ps, spec, side) <= 0) {
                    lastFail = "zero probability";
                    continue;
                }
                const auto rep = is_good_level1(chars, side, spec, ps);
                if (rep.good) {
                    Block b = level1_from_chars(chars);
                    b.subGood.assign(chars.size(), 1);
                    b.first = true;
                    return b;
                }
                lastFail = rep.failed;
            }
        }
        throw ResourceError("extend_good_block: no level-1 extension found (last failure: " + lastFail + ")");
    }
    if (j == 1) {
        const LevelCatalog& part = cats.at(other(side), 1);
        if (!part.semibadComplete)
            throw ResourceError("extend_good_block: level-1 semi-bad list of the other side is incomplete, so strong "
                                "windows cannot be certified");
        const auto& P = part.semibad;
        auto embeds = [&](const SymbolSeq& w, const SymbolSeq& p) {
            return side == Side::X ? chars_embed(spec, w, p, ps.R) : chars_embed(spec, p, w, ps.R);
        };
        std::vector<char> ex(P.size());
        for (std::size_t k = 0; k < P.size(); ++k) ex[k] = embeds(xgood, P[k].chars);
        for (std::size_t a = skip; a < own.good.size(); ++a) {
            if (++tries > static_cast<std::size_t>(own.caps.maxExtensionTries)) break;
            const SymbolSeq& f = own.good[a].chars;
            std::vector<char> ef(P.size());
            for (std::size_t k = 0; k < P.size(); ++k) ef[k] = embeds(f, P[k].chars);
            GoodContext ctx;
            ctx.status.assign(static_cast<std::size_t>(Nmin), SubStatus::Good);
            ctx.windowStrong = [&](std::size_t from, std::size_t len) {
                return is_strong(
                    len, P.size(), [&](std::size_t k, std::size_t i) { return bool(from + i == 0 ? ex[k] : ef[k]); },
                    1, ps, true);
            };
            const auto rep = is_good(static_cast<std::size_t>(Nmin), 2, ps, ctx);
            if (!rep.good) {
                lastFail = rep.failed;
                continue;
            }
            std::vector<Block> subs;
            subs.reserve(static_cast<std::size_t>(Nmin));
            for (i64 k = 0; k < Nmin; ++k) subs.push_back(level1_from_chars(k == 0 ? xgood : f));
            Block b = make_block(2, std::move(subs));
            b.subGood.assign(b.subs.size(), 1);
            b.first = true;
            return b;
        }
        throw ResourceError("extend_good_block: no level-2 extension found (last failure: " + lastFail + ")");
    }
    throw ResourceError("extend_good_block: extension is available from levels 0 and 1 only");
}

SymbolSeq deterministic_sequence(int J, const ParameterSet& ps, const ProblemSpec& spec, const CatalogSet& cats) {
    if (J < 0) throw ContractError("deterministic_sequence: J must be >= 0");
    if (J > 2) throw ResourceError("deterministic_sequence: levels above 2 need catalogs beyond level 1");
    const LevelCatalog& c0 = cats.at(Side::X, 0);
    if (c0.good.empty()) throw ResourceError("deterministic_sequence: no good level-0 symbol");
    const SymbolSeq x0 = c0.good.front().chars;
    if (J == 0) return x0;
    const std::size_t tries = static_cast<std::size_t>(c0.caps.maxExtensionTries);
    std::string lastErr;
    for (std::size_t alt = 0; alt < tries; ++alt) {
        Block b1;
        try {
            b1 = extend_good_block(x0, 0, Side::X, ps, spec, cats, alt);
        } catch (const ResourceError& e) {
            lastErr = e.what();
            break;
        }
        if (J == 1) return b1.chars;
        if (!catalog_contains(cats.at(Side::X, 1).good, b1.chars)) {
            lastErr = "level-1 extension missing from the good catalog";
            continue;
        }
        try {
            return extend_good_block(b1.chars, 1, Side::X, ps, spec, cats).chars;
        } catch (const ResourceError& e) {
            lastErr = e.what();
        }
    }
    throw ResourceError("deterministic_sequence: no sequence found: " + lastErr);
}

SymbolSeq deterministic_sequence(int J, const ParameterSet& ps, const ProblemSpec& spec, const CatalogCaps& caps) {
    return deterministic_sequence(J, ps, spec, build_catalogs(std::max(0, std::min(J - 1, 1)), ps, spec, caps));
}

}  // namespace mse

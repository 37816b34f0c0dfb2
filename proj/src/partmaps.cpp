#include "mse/partmaps.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace mse {

namespace {

struct Scale {
    i64 L, L2, L3, Lam1, F, F2, F3, D, S52, Rj, Rm, Rp, KB;
};

// Values beyond i64 range saturate; they only ever act as lower bounds on lengths.
i64 sat(const BigInt& v) {
    static const BigInt cap(std::numeric_limits<i64>::max() / 8);
    return v > cap ? static_cast<i64>(cap) : static_cast<i64>(v);
}

Scale scale(const ParameterSet& ps, int j) {
    const auto s = scales(ps, j);
    const auto s1 = scales(ps, j + 1);
    Scale c;
    c.L = sat(s.L);
    c.L2 = sat(pow_int(s.L, 2));
    c.L3 = sat(pow_int(s.L, 3));
    c.Lam1 = sat(pow_int(s.L, static_cast<unsigned long>(ps.alpha - 1)));
    c.F = sat(s.fl178);
    c.F2 = sat(floor_pow(pow_int(BigInt(2), 8) * pow_int(s.L, 17), 1, 8));
    c.F3 = sat(floor_pow(pow_int(BigInt(3), 8) * pow_int(s.L, 17), 1, 8));
    c.D = 2 * sat(s.fl94);
    c.S52 = sat(s.fl52);
    c.Rj = sat(s.Rj);
    c.Rm = sat(s.Rminus);
    c.Rp = sat(s.Rplus);
    c.KB = sat(BigInt(ps.k0) * s1.Rplus);
    return c;
}

[[noreturn]] void scale_fail(const std::string& what) {
    throw InvariantError("scale too small: " + what);
}

Rational floor_q(const Rational& q) {
    BigInt num = numerator(q), den = denominator(q);
    BigInt f = num / den;
    if (num < 0 && f * den != num) f -= 1;
    return Rational(f);
}

i64 ifloor(const Rational& q) { return to_i64(numerator(floor_q(q)), "floor"); }

i64 iceil(const Rational& q) {
    const Rational f = floor_q(q);
    return to_i64(numerator(f), "ceil") + (f == q ? 0 : 1);
}

bool contains_any(const std::vector<i64>& sorted, i64 lo, i64 hi) {  // any element in [lo, hi]
    auto it = std::lower_bound(sorted.begin(), sorted.end(), lo);
    return it != sorted.end() && *it <= hi;
}

void check_bad_set(const std::vector<i64>& B, i64 n, const char* what) {
    for (std::size_t k = 0; k < B.size(); ++k) {
        if (B[k] < 1 || B[k] > n) throw ContractError(std::string(what) + ": position out of range");
        if (k && B[k] <= B[k - 1]) throw ContractError(std::string(what) + ": positions must be strictly increasing");
    }
}

}  // namespace

// ---------------------------------------------------------------- mappings

i64 GeneralizedMapping::block_count() const {
    i64 c = 0;
    for (const auto& s : segs) c += s.singles ? s.lx() : 1;
    return c;
}

namespace {

const MapSegment* seg_x(const GeneralizedMapping& gm, i64 x) {
    auto it = std::lower_bound(gm.segs.begin(), gm.segs.end(), x, [](const MapSegment& s, i64 v) { return s.x1 < v; });
    if (it == gm.segs.end() || x <= it->x0) return nullptr;
    return &*it;
}

const MapSegment* seg_y(const GeneralizedMapping& gm, i64 y) {
    auto it = std::lower_bound(gm.segs.begin(), gm.segs.end(), y, [](const MapSegment& s, i64 v) { return s.y1 < v; });
    if (it == gm.segs.end() || y <= it->y0) return nullptr;
    return &*it;
}

}  // namespace

bool GeneralizedMapping::x_singleton(i64 x) const {
    const auto* s = seg_x(*this, x);
    return s && (s->singles || s->lx() == 1);
}

bool GeneralizedMapping::y_singleton(i64 y) const {
    const auto* s = seg_y(*this, y);
    return s && (s->singles || s->ly() == 1);
}

std::optional<i64> GeneralizedMapping::image(i64 x) const {
    const auto* s = seg_x(*this, x);
    if (!s) return std::nullopt;
    if (s->singles) return s->y0 + (x - s->x0);
    if (s->lx() == 1 && s->ly() == 1) return s->y1;
    return std::nullopt;
}

std::optional<i64> GeneralizedMapping::preimage(i64 y) const {
    const auto* s = seg_y(*this, y);
    if (!s) return std::nullopt;
    if (s->singles) return s->x0 + (y - s->y0);
    if (s->lx() == 1 && s->ly() == 1) return s->x1;
    return std::nullopt;
}

void check_partition(const Partition& p, const char* what) {
    if (p.size() < 2) throw ContractError(std::string(what) + ": partition needs at least one block");
    for (std::size_t k = 1; k < p.size(); ++k)
        if (p[k] <= p[k - 1]) throw ContractError(std::string(what) + ": cut points must be strictly increasing");
}

GeneralizedMapping induce_mapping(const MarkedPartitionPair& mpp) {
    check_partition(mpp.P, "induce_mapping");
    check_partition(mpp.Pp, "induce_mapping");
    if (mpp.P.size() != mpp.Pp.size()) throw ContractError("induce_mapping: partitions of unequal length");
    const std::size_t z = mpp.P.size() - 1;
    if (mpp.marked.size() != z) throw ContractError("induce_mapping: mark vector does not match partition length");
    GeneralizedMapping gm;
    for (std::size_t r = 0; r < z; ++r) {
        MapSegment s{mpp.P[r], mpp.P[r + 1], mpp.Pp[r], mpp.Pp[r + 1], bool(mpp.marked[r])};
        if (s.singles && s.lx() != s.ly())
            throw ContractError("induce_mapping: marked block " + std::to_string(r) + " has unequal lengths");
        if (s.singles && s.lx() == 1) s.singles = false;
        gm.segs.push_back(s);
    }
    return gm;
}

bool ratio_within(i64 ly, i64 lx, i64 R, int j, int eighths, bool strict) {
    if (lx <= 0 || ly <= 0) return false;
    const BigInt scale = pow_int(BigInt(2), static_cast<unsigned long>(8 * j + eighths));
    auto below_c = [&](const Rational& u) {  // u < c (or <=)
        if (u <= 0) return true;
        const Rational u8 = Rational(pow_int(numerator(u), 8), pow_int(denominator(u), 8)) * Rational(scale);
        return strict ? u8 < 1 : u8 <= 1;
    };
    const Rational q(ly, lx);
    return below_c(q / R - 1) && below_c(1 - q * R);
}

bool check_admissible(const GeneralizedMapping& gm) {
    if (gm.segs.empty()) return false;
    for (std::size_t k = 0; k < gm.segs.size(); ++k) {
        const auto& s = gm.segs[k];
        if (s.lx() <= 0 || s.ly() <= 0) return false;
        if (k && (s.x0 != gm.segs[k - 1].x1 || s.y0 != gm.segs[k - 1].y1)) return false;
        if (s.singles && s.lx() != s.ly()) return false;
        if (!s.singles && ((s.lx() == 1) != (s.ly() == 1))) return false;
    }
    return true;
}

namespace {

bool pieces_ok(const GeneralizedMapping& gm, int j, const ParameterSet& ps, i64 minLen) {
    for (const auto& s : gm.segs) {
        if (s.singles || (s.lx() == 1 && s.ly() == 1)) continue;
        if (std::min(s.lx(), s.ly()) <= minLen) return false;
        if (!ratio_within(s.ly(), s.lx(), ps.R, j, 10, true)) return false;
    }
    return true;
}

}  // namespace

bool check_class_G(const GeneralizedMapping& gm, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                   const ParameterSet& ps) {
    if (!check_admissible(gm)) return false;
    const Scale c = scale(ps, j);
    for (i64 x : B)
        if (!gm.x_singleton(x)) return false;
    for (i64 y : Bp)
        if (!gm.y_singleton(y)) return false;
    if (!pieces_ok(gm, j, ps, c.L)) return false;
    for (i64 x : B)
        if (std::binary_search(Bp.begin(), Bp.end(), *gm.image(x))) return false;
    for (i64 y : Bp)
        if (std::binary_search(B.begin(), B.end(), *gm.preimage(y))) return false;
    return true;
}

bool check_class_H1(const GeneralizedMapping& gm, const std::vector<i64>& B, int j, const ParameterSet& ps) {
    if (!check_admissible(gm)) return false;
    const Scale c = scale(ps, j);
    for (i64 x : B)
        if (!gm.x_singleton(x)) return false;
    if (!pieces_ok(gm, j, ps, c.L)) return false;
    const i64 np = gm.yhi() - gm.ylo();
    for (i64 x : B) {
        const i64 y = *gm.image(x) - gm.ylo();
        if (!(y > c.L3 && y < np - c.L3)) return false;
    }
    return true;
}

bool check_class_H2(const GeneralizedMapping& gm, const std::vector<i64>& B, int j, const ParameterSet& ps) {
    if (!check_admissible(gm)) return false;
    const Scale c = scale(ps, j);
    for (i64 x : B)
        if (!gm.x_singleton(x)) return false;
    const i64 np = gm.yhi() - gm.ylo();
    for (i64 x : B) {
        const i64 y = *gm.image(x) - gm.ylo();
        if (!(y > c.L3 && y < np - c.L3)) return false;
    }
    for (const auto& s : gm.segs) {
        if (s.singles || (s.lx() == 1 && s.ly() == 1)) continue;
        if (s.lx() != c.Rj || s.ly() < c.Rm || s.ly() > c.Rp) return false;
    }
    return true;
}

bool check_marked_conditions(const MarkedPartitionPair& mpp, const std::vector<i64>& B, const std::vector<i64>& Bp,
                             int j, const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    const std::size_t z = mpp.P.size() - 1;
    for (std::size_t r = 0; r < z; ++r) {
        const bool bx = contains_any(B, mpp.P[r] + 1, mpp.P[r + 1]);
        const bool by = contains_any(Bp, mpp.Pp[r] + 1, mpp.Pp[r + 1]);
        if (bx && by) return false;
        const i64 lx = mpp.P[r + 1] - mpp.P[r], ly = mpp.Pp[r + 1] - mpp.Pp[r];
        if (bx || by) {
            if (!mpp.marked[r] || lx != ly) return false;
        } else {
            if (mpp.marked[r]) return false;
            if (std::min(lx, ly) <= c.L2 || !ratio_within(ly, lx, ps.R, j, 10, true)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- psi

PsiMap build_psi(const Rational& n, const Rational& np, const Rational& s, const Rational& margin) {
    if (margin <= 0) throw ContractError("build_psi: margin must be positive");
    if (n <= 2 * margin || np <= 2 * margin) throw ContractError("build_psi: n and n' must exceed twice the margin");
    if (s < 0 || s >= margin) throw ContractError("build_psi: shift must lie in [0, margin)");
    return {n, np, s, margin};
}

Rational psi_eval(const PsiMap& p, const Rational& x) {
    if (x < 0 || x > p.n) throw ContractError("psi_eval: argument outside [0, n]");
    if (x <= p.M) return x * (p.M + p.s) / p.M;
    if (x <= p.n - p.M) return p.M + p.s + (p.np - 2 * p.M) / (p.n - 2 * p.M) * (x - p.M);
    return p.np - (p.n - x) * (p.M - p.s) / p.M;
}

Rational psi_inv(const PsiMap& p, const Rational& y) {
    if (y < 0 || y > p.np) throw ContractError("psi_inv: argument outside [0, n']");
    if (y <= p.M + p.s) return y * p.M / (p.M + p.s);
    if (y <= p.np - p.M + p.s) return p.M + (p.n - 2 * p.M) / (p.np - 2 * p.M) * (y - p.M - p.s);
    return p.n - (p.np - y) * p.M / (p.M - p.s);
}

namespace {

// psi_s(x) = a + b s on the piece containing x.
std::pair<Rational, Rational> psi_affine(const Rational& n, const Rational& np, const Rational& M, const Rational& x) {
    if (x <= M) return {x, x / M};
    if (x <= n - M) return {M + (np - 2 * M) / (n - 2 * M) * (x - M), Rational(1)};
    return {np - (n - x), (n - x) / M};
}

void check_shift_pre(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, const Scale& c,
                     i64 margin, const char* who) {
    check_bad_set(B, n, who);
    check_bad_set(Bp, np, who);
    if (static_cast<i64>(B.size()) > c.KB || static_cast<i64>(Bp.size()) > c.KB)
        throw ContractError(std::string(who) + ": more bad positions than k0 R_{j+1}^+");
    if (!B.empty() && (B.front() <= margin || n - B.back() <= margin))
        throw ContractError(std::string(who) + ": X bad positions within the L_j^3 margin");
    if (!Bp.empty() && (Bp.front() <= margin || np - Bp.back() <= margin))
        throw ContractError(std::string(who) + ": Y bad positions within the L_j^3 margin");
}

std::optional<i64> separating_shift(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp,
                                    const Scale& c) {
    if (B.empty() || Bp.empty()) return 0;
    const Rational M(c.L3, 2), N(n), NP(np);
    const i64 sMax = std::min<i64>(c.S52, iceil(M) - 1);
    const Rational D(c.D);
    i64 s = 0;
    while (s <= sMax) {
        const PsiMap pm = build_psi(N, NP, Rational(s), M);
        i64 next = s;
        for (i64 i : B) {
            const Rational pi = psi_eval(pm, Rational(i));
            for (i64 ip : Bp) {
                if (abs(pi - ip) < D) {
                    const auto [a, b] = psi_affine(N, NP, M, Rational(i));
                    if (b == 0) return std::nullopt;
                    next = std::max(next, iceil((ip + D - a) / b));
                }
                const Rational qi = psi_inv(pm, Rational(ip));
                if (abs(Rational(i) - qi) < D) {
                    if (i - c.D <= 0) return std::nullopt;
                    const auto [a, b] = psi_affine(N, NP, M, Rational(i - c.D));
                    if (b == 0) return std::nullopt;
                    next = std::max(next, iceil((ip - a) / b));
                }
            }
        }
        if (next == s) return s;
        s = next;
    }
    return std::nullopt;
}

}  // namespace

std::optional<i64> find_separating_shift(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                                         const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    check_shift_pre(n, np, B, Bp, c, c.L3, "find_separating_shift");
    return separating_shift(n, np, B, Bp, c);
}

// ---------------------------------------------------------------- G family

namespace {

struct SidePieces {
    std::vector<i64> cuts;     // from lo to hi
    std::vector<bool> dirty;   // per block
};

// Alternating clean/dirty partition of (lo, hi] around the sorted bad positions `bad` (all inside).
SidePieces cluster_partition(i64 lo, i64 hi, const std::vector<i64>& bad, const Scale& c) {
    SidePieces sp;
    sp.cuts.push_back(lo);
    i64 cur = bad.front() - c.F;
    if (cur <= lo) scale_fail("first bad position within L_j^(17/8) of its interval start");
    sp.cuts.push_back(cur);
    sp.dirty.push_back(false);
    while (true) {
        if (!sp.dirty.back()) {
            i64 i = cur + c.F;
            while (true) {
                auto it = std::upper_bound(bad.begin(), bad.end(), i + c.F3);
                if (it == bad.begin() || *(it - 1) < i - c.F) break;
                i = *(it - 1) + c.F + 1;
            }
            if (i >= hi) scale_fail("bad cluster runs into the end of its interval");
            sp.cuts.push_back(i);
            sp.dirty.push_back(true);
            cur = i;
        } else {
            auto it = std::lower_bound(bad.begin(), bad.end(), cur + c.F2 + c.F + 1);
            if (it == bad.end()) {
                sp.cuts.push_back(hi);
                sp.dirty.push_back(false);
                break;
            }
            cur = *it - c.F - 1;
            sp.cuts.push_back(cur);
            sp.dirty.push_back(false);
        }
    }
    return sp;
}

// Partner cuts: first cut at `first`, dirty blocks copied, clean blocks follow the increments of `f`, last cut at hi.
std::vector<i64> partner_cuts(const SidePieces& sp, i64 lo, i64 first, i64 hi,
                              const std::function<Rational(i64)>& f) {
    std::vector<i64> out{lo, first};
    const std::size_t z = sp.cuts.size() - 1;
    for (std::size_t h = 1; h + 1 < z; ++h) {
        const i64 len = sp.cuts[h + 1] - sp.cuts[h];
        out.push_back(out.back() + (sp.dirty[h] ? len : ifloor(f(sp.cuts[h + 1])) - ifloor(f(sp.cuts[h]))));
    }
    out.push_back(hi);
    for (std::size_t k = 1; k < out.size(); ++k)
        if (out[k] <= out[k - 1]) scale_fail("partner partition is not increasing");
    return out;
}

MarkedPartitionPair g_core(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                           const ParameterSet& ps, const Scale& c, i64& shiftOut) {
    if (n <= c.L3 || np <= c.L3) scale_fail("n, n' must exceed L_j^3, twice the psi margin");
    const auto s0 = separating_shift(n, np, B, Bp, c);
    if (!s0) scale_fail("no integer shift in [0, L_j^(5/2)] separates B from B' by 2L_j^(9/4)");
    shiftOut = *s0;
    const PsiMap pm = build_psi(Rational(n), Rational(np), Rational(*s0), Rational(c.L3, 2));

    // Cut points between neighbouring bad points of different sides, in X coordinates.
    std::vector<std::pair<Rational, int>> pts;
    for (i64 b : B) pts.push_back({Rational(b), 0});
    for (i64 b : Bp) pts.push_back({psi_inv(pm, Rational(b)), 1});
    std::sort(pts.begin(), pts.end());
    std::vector<Rational> t{Rational(0)};
    for (std::size_t k = 1; k < pts.size(); ++k)
        if (pts[k].second != pts[k - 1].second) t.push_back((pts[k].first + pts[k - 1].first) / 2);
    t.push_back(Rational(n));

    MarkedPartitionPair mpp;
    mpp.P.push_back(0);
    mpp.Pp.push_back(0);
    for (std::size_t r = 1; r < t.size(); ++r) {
        const i64 xlo = ifloor(t[r - 1]), xhi = ifloor(t[r]);
        const i64 ylo = ifloor(psi_eval(pm, t[r - 1])), yhi = ifloor(psi_eval(pm, t[r]));
        std::vector<i64> bx, by;
        for (i64 b : B)
            if (b > xlo && b <= xhi) bx.push_back(b);
        for (i64 b : Bp)
            if (b > ylo && b <= yhi) by.push_back(b);
        if (!bx.empty() && !by.empty()) scale_fail("an interval of Q meets both B and psi^-1(B')");
        std::vector<i64> px, py;
        std::vector<bool> dirty;
        if (!bx.empty()) {
            const auto sp = cluster_partition(xlo, xhi, bx, c);
            px = sp.cuts;
            py = partner_cuts(sp, ylo, ifloor(psi_eval(pm, Rational(bx.front()))) - c.F, yhi,
                              [&](i64 x) { return psi_eval(pm, Rational(x)); });
            dirty = sp.dirty;
        } else if (!by.empty()) {
            const auto sp = cluster_partition(ylo, yhi, by, c);
            py = sp.cuts;
            px = partner_cuts(sp, xlo, ifloor(psi_inv(pm, Rational(by.front()))) - c.F, xhi,
                              [&](i64 y) { return psi_inv(pm, Rational(y)); });
            dirty = sp.dirty;
        } else {
            px = {xlo, xhi};
            py = {ylo, yhi};
            dirty = {false};
        }
        mpp.P.insert(mpp.P.end(), px.begin() + 1, px.end());
        mpp.Pp.insert(mpp.Pp.end(), py.begin() + 1, py.end());
        mpp.marked.insert(mpp.marked.end(), dirty.begin(), dirty.end());
    }
    const std::size_t z = mpp.marked.size();
    if (mpp.marked.front() || mpp.marked.back()) scale_fail("first or last block is marked");
    for (std::size_t r = 0; r < z; ++r) {
        const i64 lx = mpp.P[r + 1] - mpp.P[r], ly = mpp.Pp[r + 1] - mpp.Pp[r];
        if (lx <= 0 || ly <= 0) scale_fail("empty block in the partition pair");
        if (mpp.marked[r]) {
            if (lx != ly) scale_fail("marked blocks of unequal length");
            if (contains_any(B, mpp.P[r] + 1, mpp.P[r + 1]) && contains_any(Bp, mpp.Pp[r] + 1, mpp.Pp[r + 1]))
                scale_fail("a block index is marked from both sides");
        } else {
            if (contains_any(B, mpp.P[r] + 1, mpp.P[r + 1]) || contains_any(Bp, mpp.Pp[r] + 1, mpp.Pp[r + 1]))
                scale_fail("unmarked block contains a bad position");
            if (std::min(lx, ly) < c.F2) scale_fail("unmarked block shorter than 2L_j^(17/8)");
            if (!ratio_within(ly, lx, ps.R, j, 12, false)) scale_fail("unmarked block ratio outside the 3/2 bound");
        }
    }
    return mpp;
}

}  // namespace

MarkedPartitionPair MappingFamily::member_pair(i64 h) const {
    if (h < 1 || h > count) throw ContractError("MappingFamily: member index out of range");
    MarkedPartitionPair m = base;
    for (std::size_t k = shiftFrom; k <= shiftTo && k < m.Pp.size(); ++k) m.Pp[k] += h - 1;
    return m;
}

GeneralizedMapping MappingFamily::member(i64 h) const { return induce_mapping(member_pair(h)); }

MappingFamily build_G_family(i64 n, i64 np, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                             const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    if (n <= c.Lam1 || np <= c.Lam1) throw ContractError("build_G_family: n, n' must exceed L_j^(alpha-1)");
    if (!ratio_within(np, n, ps.R, j, 14, false)) throw ContractError("build_G_family: n'/n outside the 7/4 bound");
    check_shift_pre(n, np, B, Bp, c, c.L3, "build_G_family");
    MappingFamily f;
    f.base = g_core(n, np, B, Bp, j, ps, c, f.psiShift);
    f.count = c.L2;
    f.shiftFrom = 1;
    f.shiftTo = f.base.Pp.size() - 2;
    const i64 lastY = f.base.Pp.back() - f.base.Pp[f.base.Pp.size() - 2];
    if (lastY - (f.count - 1) < c.F2) scale_fail("last Y block cannot absorb the L_j^2 shifts");
    return f;
}

MappingFamily build_H1_family(i64 n, i64 np, const std::vector<i64>& B, int j, const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    if (n <= c.Lam1 || np <= c.Lam1) throw ContractError("build_H1_family: n, n' must exceed L_j^(alpha-1)");
    if (Rational(np, n) < Rational(1, ps.R) || Rational(np, n) > Rational(ps.R))
        throw ContractError("build_H1_family: n'/n outside [1/R, R]");
    check_bad_set(B, n, "build_H1_family");
    if (static_cast<i64>(B.size()) > ps.k0) throw ContractError("build_H1_family: more than k0 bad positions");
    if (c.L3 % 2) throw ContractError("build_H1_family: L_j^3 must be even");
    if (!B.empty() && (B.front() <= c.L3 || n - B.back() <= c.L3))
        throw ContractError("build_H1_family: bad positions within the L_j^3 margin");
    const i64 hx = c.L3 / 2;
    const i64 nA = n - 2 * hx, npA = np - 2 * c.L3;
    if (nA <= 0 || npA <= 0) scale_fail("n, n' too short for the end segments");
    if (!ratio_within(npA, nA, ps.R, j, 14, false)) scale_fail("trimmed ratio outside the 7/4 bound");
    std::vector<i64> BA;
    for (i64 b : B) BA.push_back(b - hx);
    check_shift_pre(nA, npA, BA, {}, c, hx, "build_H1_family");
    MappingFamily inner;
    inner.base = g_core(nA, npA, BA, {}, j, ps, c, inner.psiShift);
    MappingFamily f;
    f.psiShift = inner.psiShift;
    f.base.P.push_back(0);
    f.base.Pp.push_back(0);
    for (i64 v : inner.base.P) f.base.P.push_back(v + hx);
    for (i64 v : inner.base.Pp) f.base.Pp.push_back(v + c.L3);
    f.base.P.push_back(n);
    f.base.Pp.push_back(np);
    f.base.marked.push_back(false);
    f.base.marked.insert(f.base.marked.end(), inner.base.marked.begin(), inner.base.marked.end());
    f.base.marked.push_back(false);
    f.count = c.L2;
    f.shiftFrom = 2;
    f.shiftTo = f.base.Pp.size() - 3;
    const std::size_t z = f.base.Pp.size();
    const i64 lastInner = f.base.Pp[z - 2] - f.base.Pp[z - 3];
    if (lastInner - (f.count - 1) < c.F2) scale_fail("last inner Y block cannot absorb the L_j^2 shifts");
    return f;
}

// ---------------------------------------------------------------- H2

H2Result build_H2(i64 n, i64 np, const std::vector<i64>& B, int j, const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    if (n <= c.Lam1 || np <= c.Lam1) throw ContractError("build_H2: n, n' must exceed L_j^(alpha-1)");
    if (Rational(np, n) < Rational(3, 2 * ps.R) || Rational(np, n) > Rational(2 * ps.R, 3))
        throw ContractError("build_H2: n'/n outside [3/(2R), 2R/3]");
    check_bad_set(B, n, "build_H2");
    if (!B.empty() && (B.front() <= c.L3 || n - B.back() <= c.L3))
        throw ContractError("build_H2: bad positions within the L_j^3 margin");
    if (Rational(static_cast<i64>(B.size())) > Rational(n - 2 * c.L3, 10 * c.Rp))
        throw ContractError("build_H2: more bad positions than (n - 2L_j^3) / (10 R_j^+)");
    if (np <= 2 * c.L3) scale_fail("build_H2: n' too short for the margins");

    H2Result res;
    res.k = (n - 2 * c.L3) / c.Rj;
    res.r = (n - 2 * c.L3) % c.Rj;
    if (res.k < 1) scale_fail("build_H2: n - 2L_j^3 shorter than R_j");
    auto& P = res.mpp.P;
    P = {0, c.L3};
    for (i64 h = 2; h <= res.k + 1; ++h) P.push_back(c.L3 + (h - 1) * c.Rj);
    if (res.r > 0) P.push_back(n - c.L3);
    P.push_back(n);
    const std::size_t z = P.size() - 1;
    // Interior blocks are 1..k, plus the remainder block k+1 when r > 0.
    const std::size_t lastInterior = res.r > 0 ? static_cast<std::size_t>(res.k + 1) : static_cast<std::size_t>(res.k);
    std::vector<bool> fixed(z, false);
    for (std::size_t h = 1; h <= lastInterior; ++h)
        if (contains_any(B, P[h] + 1, P[h + 1])) fixed[h] = true;
    if (res.r > 0) fixed[lastInterior] = true;
    i64 fixedLen = 0, free = 0;
    for (std::size_t h = 1; h <= lastInterior; ++h) {
        if (fixed[h]) fixedLen += P[h + 1] - P[h];
        else ++free;
    }
    if (free == 0) scale_fail("every interior block of the H2 partition is marked");
    const i64 avail = np - 2 * c.L3 - fixedLen;
    if (avail < 0) scale_fail("marked blocks exceed n' - 2L_j^3");
    res.s = avail / free;
    res.rPrime = avail % free;
    if (res.s < c.Rm || res.s > c.Rp - 1)
        throw InvariantError("build_H2: step size s = " + std::to_string(res.s) + " outside [R_j^-, R_j^+ - 1] = [" +
                             std::to_string(c.Rm) + ", " + std::to_string(c.Rp - 1) + "]");
    auto& Pp = res.mpp.Pp;
    Pp = {0, c.L3};
    i64 t = 0;
    for (std::size_t h = 1; h <= lastInterior; ++h) {
        if (fixed[h]) Pp.push_back(Pp.back() + (P[h + 1] - P[h]));
        else Pp.push_back(Pp.back() + res.s + (++t <= res.rPrime ? 1 : 0));
    }
    if (Pp.back() != np - c.L3) throw InvariantError("build_H2: interior cuts do not end at n' - L_j^3");
    Pp.push_back(np);
    res.mpp.marked.assign(z, false);
    res.mpp.marked[0] = true;
    res.mpp.marked[z - 1] = true;
    for (std::size_t h = 1; h <= lastInterior; ++h)
        if (fixed[h]) res.mpp.marked[h] = true;
    res.gm = induce_mapping(res.mpp);
    if (check_admissible(res.gm)) res.gm.tags.insert("admissible");
    if (check_class_H2(res.gm, B, j, ps)) res.gm.tags.insert("H2");
    return res;
}

// ---------------------------------------------------------------- compression schedule

std::vector<std::pair<std::pair<i64, i64>, std::pair<i64, i64>>> CompressSchedule::pairs(std::size_t cap) const {
    std::vector<std::pair<std::pair<i64, i64>, std::pair<i64, i64>>> out;
    if (direct) {
        out.push_back({{0, Rj}, {0, s}});
        return out;
    }
    if (static_cast<u64>(k) + 1 > cap) throw ResourceError("CompressSchedule: too many pairs to materialise");
    i64 y = 0;
    for (i64 i = 0; i < k; ++i) {
        const i64 step = s + (i < plusSteps ? 1 : 0);
        out.push_back({{i * Rj, (i + 1) * Rj}, {y, y + step}});
        y += step;
    }
    if (r > 0) out.push_back({{k * Rj, k * Rj + r}, {y, y + r}});
    return out;
}

CompressSchedule compress_embed_schedule(i64 n, i64 np, int j, const ParameterSet& ps) {
    const Scale c = scale(ps, j);
    CompressSchedule cs;
    cs.Rj = c.Rj;
    if (n == c.Rj && np >= c.Rm && np <= c.Rp) {
        cs.direct = true;
        cs.k = 1;
        cs.s = np;
        cs.proofBound = np >= c.Rm + 1 && np <= c.Rp - 1;
        return cs;
    }
    if (n <= c.L) throw ContractError("compress_embed_schedule: n must exceed L_j");
    if (!ratio_within(np, n, ps.R, j, 10, false))
        throw ContractError("compress_embed_schedule: n'/n outside the 5/4 bound");
    cs.k = n / c.Rj;
    cs.r = n % c.Rj;
    if (cs.k < 1) throw ContractError("compress_embed_schedule: n shorter than R_j");
    cs.s = (np - cs.r) / cs.k;
    cs.plusSteps = (np - cs.r) - cs.s * cs.k;
    cs.proofBound = cs.s >= c.Rm + 1 && cs.s <= c.Rp - 1;
    if (cs.s < c.Rm || cs.s + (cs.plusSteps ? 1 : 0) > c.Rp)
        throw InvariantError("compress_embed_schedule: Y step " + std::to_string(cs.s) + " outside [R_j^-, R_j^+]");
    return cs;
}

// ---------------------------------------------------------------- witness composition

std::optional<EmbedWitness> apply_mapping_embed(const GeneralizedMapping& gm, const EmbedOracles& oIn, int j,
                                                const ParameterSet& ps) {
    if (!gm.tags.count("admissible") || !(gm.tags.count("G") || gm.tags.count("H1") || gm.tags.count("H2")))
        throw ContractError("apply_mapping_embed: mapping carries no class tag");
    EmbedOracles o = oIn;
    o.c = step_constants(scales(ps, j));
    const i64 x0 = gm.xlo(), y0 = gm.ylo();
    EmbedWitness w;
    w.iSeq.push_back(0);
    w.iPrimeSeq.push_back(0);
    auto step = [&](i64 dx, i64 dy) {
        w.iSeq.push_back(w.iSeq.back() + dx);
        w.iPrimeSeq.push_back(w.iPrimeSeq.back() + dy);
    };
    for (const auto& s : gm.segs) {
        if (s.singles || (s.lx() == 1 && s.ly() == 1)) {
            for (i64 u = 0; u < s.lx(); ++u) {
                if (!o.pairEmbed(s.x0 - x0 + u, s.y0 - y0 + u)) return std::nullopt;
                step(1, 1);
            }
            continue;
        }
        for (i64 a = s.x0; a < s.x1; ++a)
            if (!o.goodX(a - x0)) return std::nullopt;
        for (i64 b = s.y0; b < s.y1; ++b)
            if (!o.goodY(b - y0)) return std::nullopt;
        if (step_kind(s.lx(), s.ly(), o.c) != StepKind::Invalid) {
            step(s.lx(), s.ly());
            continue;
        }
        const auto cs = compress_embed_schedule(s.lx(), s.ly(), j, ps);
        for (const auto& [xr, yr] : cs.pairs()) {
            const i64 dx = xr.second - xr.first, dy = yr.second - yr.first;
            if (dx == dy && dx < o.c.R0) {
                for (i64 u = 0; u < dx; ++u) {
                    if (!o.pairEmbed(s.x0 - x0 + xr.first + u, s.y0 - y0 + yr.first + u)) return std::nullopt;
                    step(1, 1);
                }
            } else if (step_kind(dx, dy, o.c) != StepKind::Invalid) {
                step(dx, dy);
            } else {
                for (i64 u = 0; u < dx; ++u) {  // r-by-r tail of length >= R_j is impossible (r < R_j)
                    if (!o.pairEmbed(s.x0 - x0 + xr.first + u, s.y0 - y0 + yr.first + u)) return std::nullopt;
                    step(1, 1);
                }
            }
        }
    }
    return w;
}

}  // namespace mse

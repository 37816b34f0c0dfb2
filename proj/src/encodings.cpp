#include "mse/encodings.hpp"

#include <algorithm>
#include <array>

namespace mse {

const char* star_class_name(StarClass c) {
    switch (c) {
        case StarClass::ZERO: return "0";
        case StarClass::ONE: return "1";
        case StarClass::STAR: return "*";
    }
    return "?";
}

i64 flip_count(const Bits& Z) {
    i64 f = 0;
    for (std::size_t i = 1; i < Z.size(); ++i) f += Z[i] != Z[i - 1];
    return f;
}

StarClass classify_word(const Bits& Z, i64 R) {
    if (Z.empty()) throw ContractError("classify_word: empty word");
    if (flip_count(Z) >= 6 * R * R) return StarClass::STAR;
    const auto ones = std::count(Z.begin(), Z.end(), 1);
    const auto zeros = static_cast<std::ptrdiff_t>(Z.size()) - ones;
    return zeros > ones ? StarClass::ZERO : StarClass::ONE;
}

ProblemSpec lipschitz_spec(int M0, i64 R) {
    if (M0 < 1) throw ContractError("lipschitz_spec: M0 must be >= 1");
    if (M0 > 4096) throw ResourceError("lipschitz_spec: M0 above 4096");
    // cnt[f][o][b]: words so far with f flips, o ones, last bit b.
    const int n = M0;
    std::vector<std::vector<std::array<BigInt, 2>>> cnt(n, std::vector<std::array<BigInt, 2>>(n + 1));
    cnt[0][0][0] = 1;
    cnt[0][1][1] = 1;
    for (int len = 1; len < n; ++len) {
        std::vector<std::vector<std::array<BigInt, 2>>> nxt(n, std::vector<std::array<BigInt, 2>>(n + 1));
        for (int f = 0; f < len; ++f)
            for (int o = 0; o <= len; ++o)
                for (int b = 0; b < 2; ++b) {
                    const BigInt& v = cnt[f][o][b];
                    if (v == 0) continue;
                    for (int nb = 0; nb < 2; ++nb) nxt[f + (nb != b)][o + nb][nb] += v;
                }
        cnt.swap(nxt);
    }
    const i64 thr = 6 * R * R;
    BigInt star = 0, zero = 0, one = 0;
    for (int f = 0; f < n; ++f)
        for (int o = 0; o <= n; ++o) {
            const BigInt v = cnt[f][o][0] + cnt[f][o][1];
            if (f >= thr) star += v;
            else if (n - o > o) zero += v;
            else one += v;
        }
    const BigInt total = pow_int(BigInt(2), n);
    ProblemSpec s;
    s.name = "lipschitz(M0=" + std::to_string(M0) + ",R=" + std::to_string(R) + ")";
    s.alphabetX = {"0", "1"};
    s.alphabetY = {"0", "1", "*"};
    s.muX = {Rational(1, 2), Rational(1, 2)};
    s.muY = {Rational(zero, total), Rational(one, total), Rational(star, total)};
    s.relation = {{0, 0}, {0, 2}, {1, 1}, {1, 2}};
    s.goodX = {true, true};
    s.goodY = {false, false, true};
    return s;
}

std::pair<SymbolSeq, SymbolSeq> encode_lipschitz(const Bits& Xstar, const Bits& Ystar, int M0, i64 R) {
    if (M0 < 1) throw ContractError("encode_lipschitz: M0 must be >= 1");
    if (Ystar.size() % static_cast<std::size_t>(M0) != 0)
        throw ContractError("encode_lipschitz: |Y*| = " + std::to_string(Ystar.size()) +
                            " is not a multiple of M0 = " + std::to_string(M0));
    for (int b : Xstar)
        if (b != 0 && b != 1) throw ContractError("encode_lipschitz: X* is not a bit sequence");
    SymbolSeq X(Xstar.begin(), Xstar.end()), Y;
    for (std::size_t k = 0; k < Ystar.size(); k += M0) {
        Bits w(Ystar.begin() + k, Ystar.begin() + k + M0);
        Y.push_back(static_cast<int>(classify_word(w, R)));
    }
    return {X, Y};
}

LipschitzDecode decode_lipschitz(const Bits& Xstar, const Bits& Ystar, int M0, i64 R, const EmbedWitness& w) {
    const auto spec = lipschitz_spec(M0, R);
    const auto [X, Y] = encode_lipschitz(Xstar, Ystar, M0, R);
    const auto o = symbol_oracles(spec, X, Y, step_constants(R));
    if (!rembed_verify(i64(X.size()), i64(Y.size()), w, o))
        throw ContractError("decode_lipschitz: witness does not verify for the encoded pair");

    LipschitzDecode out;
    std::vector<i64> phi;
    for (std::size_t h = 0; h + 1 < w.iSeq.size(); ++h) {
        const i64 ylo = w.iPrimeSeq[h] * M0 + 1, yhi = w.iPrimeSeq[h + 1] * M0;
        i64 p = ylo - 1;
        i64 first = -1;
        for (i64 i = w.iSeq[h] + 1; i <= w.iSeq[h + 1]; ++i) {
            const int bit = Xstar[i - 1];
            ++p;
            while (p <= yhi && Ystar[p - 1] != bit) ++p;
            if (p > yhi) throw InvariantError("decode_lipschitz: segment " + std::to_string(h) + " has no matching bit");
            if (first < 0) first = p;
            phi.push_back(p);
        }
        out.maxBoundaryGap = std::max({out.maxBoundaryGap, first - ylo, yhi - p});
    }
    for (std::size_t i = 1; i < phi.size(); ++i) out.Machieved = std::max(out.Machieved, phi[i] - phi[i - 1]);
    out.phi1 = phi.empty() ? 0 : phi[0];
    out.M = std::max<i64>({out.Machieved, 2 * out.phi1, 3 * out.maxBoundaryGap, 1});
    out.map = LipschitzMap{phi, out.M, std::max<i64>(out.M / 2, 1)};
    return out;
}

// ---------------------------------------------------------------- gap classes

int gap_class(i64 L) {
    if (L < 0) throw ContractError("gap_class: negative gap");
    int j = 0;
    while (L > 0) {
        ++j;
        L >>= 1;
    }
    return j;
}

SymbolSeq gap_encode(const std::vector<i64>& points) {
    if (points.empty() || points.front() != 0) throw ContractError("gap_encode: first point must be 0");
    SymbolSeq s;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i] <= points[i - 1]) throw ContractError("gap_encode: points not strictly increasing");
        s.push_back(gap_class(points[i] - points[i - 1] - 1));
    }
    return s;
}

std::vector<i64> gap_realize(const SymbolSeq& classes) {
    std::vector<i64> pts{0};
    for (int j : classes) {
        if (j < 0 || j > 62) throw ContractError("gap_realize: class index out of range");
        const i64 L = j == 0 ? 0 : (i64(1) << (j - 1));
        pts.push_back(pts.back() + L + 1);
    }
    return pts;
}

Rational gap_class_mass(int j) {
    if (j < 0) throw ContractError("gap_class_mass: negative class");
    if (j == 0) return Rational(1, 2);
    if (j > 24) throw ResourceError("gap_class_mass: class index above 24");
    const BigInt a = pow_int(BigInt(2), 1ul << (j - 1));
    const BigInt b = pow_int(BigInt(2), 1ul << j);
    return Rational(BigInt(1), a) - Rational(BigInt(1), b);
}

ProblemSpec roughiso_spec(int M0, int K) {
    if (M0 < 0) throw ContractError("roughiso_spec: M0 must be >= 0");
    if (K < 0) K = 2 * M0 + 4;
    if (K < M0) throw ContractError("roughiso_spec: truncation below M0");
    ProblemSpec s;
    s.name = "roughiso(M0=" + std::to_string(M0) + ",K=" + std::to_string(K) + ")";
    for (int j = 0; j <= K; ++j) {
        s.alphabetX.push_back("C" + std::to_string(j));
        s.muX.push_back(gap_class_mass(j));
        s.goodX.push_back(j <= M0);
    }
    s.alphabetY = s.alphabetX;
    s.muY = s.muX;
    s.goodY = s.goodX;
    for (int a = 0; a <= K; ++a)
        for (int b = 0; b <= K; ++b)
            if (std::abs(a - b) <= M0) s.relation.insert({a, b});
    s.gapM0 = M0;
    return s;
}

RoughIsoConstants roughiso_constants(int M0, i64 R) {
    const BigInt R0p = BigInt(3) * R * R;
    return {Rational(pow_int(BigInt(2), M0 + 2) * R0p), Rational(pow_int(BigInt(2), M0 + 1) * R0p),
            Rational(pow_int(BigInt(2), M0 + 1) * R0p)};
}

RoughIsoMap decode_roughiso(const std::vector<i64>& pointsX, const std::vector<i64>& pointsY,
                            const EmbedWitness& w, int M0, i64 R) {
    const auto X = gap_encode(pointsX);
    const auto Y = gap_encode(pointsY);
    const auto spec = roughiso_spec(M0, M0);
    const auto o = symbol_oracles(spec, X, Y, step_constants(R));
    if (!rembed_verify(i64(X.size()), i64(Y.size()), w, o))
        throw ContractError("decode_roughiso: witness does not verify for the gap-encoded pair");
    const auto c = roughiso_constants(M0, R);
    RoughIsoMap T{{}, c.M, c.D, c.C};
    for (std::size_t r = 0; r + 1 < w.iSeq.size(); ++r) {
        const i64 target = pointsY[w.iPrimeSeq[r]];
        for (i64 idx = w.iSeq[r]; idx < w.iSeq[r + 1]; ++idx) T.assignment[pointsX[idx]] = target;
    }
    T.assignment[pointsX.back()] = pointsY.back();
    return T;
}

// ---------------------------------------------------------------- compatible sequences

bool deletion_conditions_hold(const Bits& X, const Bits& Y, const DeletionSets& d) {
    std::vector<char> gx(X.size() + 1, 0), gy(Y.size() + 1, 0);
    for (i64 k : d.D) {
        if (k < 1 || k > i64(X.size()) || X[k - 1] != 0 || gx[k]) return false;
        gx[k] = 1;
    }
    for (i64 k : d.Dprime) {
        if (k < 1 || k > i64(Y.size()) || Y[k - 1] != 0 || gy[k]) return false;
        gy[k] = 1;
    }
    Bits xs, ys;
    for (std::size_t k = 1; k <= X.size(); ++k)
        if (!gx[k]) xs.push_back(X[k - 1]);
    for (std::size_t k = 1; k <= Y.size(); ++k)
        if (!gy[k]) ys.push_back(Y[k - 1]);
    for (std::size_t k = 0; k < std::min(xs.size(), ys.size()); ++k)
        if (xs[k] == ys[k]) return false;
    return true;
}

DeletionSets decode_compatible(const Bits& X, const Bits& Y, const EmbedWitness& w, i64 R) {
    const auto spec = compatible_spec(Rational(1, 2));
    const SymbolSeq xs(X.begin(), X.end()), ys(Y.begin(), Y.end());
    const auto c = step_constants(R);
    const auto o = symbol_oracles(spec, xs, ys, c);
    if (!rembed_verify(i64(X.size()), i64(Y.size()), w, o))
        throw ContractError("decode_compatible: witness does not verify for the compatible spec");
    DeletionSets d;
    for (std::size_t h = 0; h + 1 < w.iSeq.size(); ++h) {
        const i64 a = w.iSeq[h], a1 = w.iSeq[h + 1], b = w.iPrimeSeq[h], b1 = w.iPrimeSeq[h + 1];
        const bool jump = a1 - a == c.R0 || b1 - b == c.R0;
        const bool paired = a1 - a == 1 && b1 - b == 1;
        const bool doubleZero = paired && X[a] == 0 && Y[b] == 0;
        if (paired && !doubleZero) continue;
        if (!jump && !doubleZero) continue;
        for (i64 k = a + 1; k <= a1; ++k) d.D.push_back(k);
        for (i64 k = b + 1; k <= b1; ++k) d.Dprime.push_back(k);
    }
    return d;
}

}  // namespace mse

#include "mse/deciders.hpp"

#include <algorithm>
#include <cmath>

namespace mse {

bool lipschitz_map_valid(const Bits& X, const Bits& Y, const LipschitzMap& m) {
    if (m.phi.size() != X.size()) return false;
    const i64 ny = static_cast<i64>(Y.size());
    for (std::size_t i = 0; i < m.phi.size(); ++i) {
        const i64 p = m.phi[i];
        if (p < 1 || p > ny) return false;
        if (i == 0 && p > m.firstMax) return false;
        if (i > 0) {
            const i64 g = p - m.phi[i - 1];
            if (g < 1 || g > m.M) return false;
        }
        if (X[i] != Y[p - 1]) return false;
    }
    return true;
}

std::optional<LipschitzMap> lipschitz_embed_greedy(const Bits& X, const Bits& Y, i64 M, i64 firstMax) {
    if (M < 1 || firstMax < 1) throw ContractError("lipschitz_embed_greedy: M and firstMax must be >= 1");
    const i64 n = static_cast<i64>(X.size()), ny = static_cast<i64>(Y.size());
    LipschitzMap out{{}, M, firstMax};
    if (n == 0) return out;
    // ok[i][p]: X_i can sit at Y_p and X_{i+1..n} can follow.  cnt = prefix sums of ok[i+1].
    std::vector<std::vector<char>> ok(n + 1, std::vector<char>(ny + 2, 0));
    std::vector<i64> cnt(ny + 2, 0);
    for (i64 i = n; i >= 1; --i) {
        for (i64 p = 1; p <= ny; ++p) {
            if (X[i - 1] != Y[p - 1]) continue;
            if (i == n) {
                ok[i][p] = 1;
            } else {
                const i64 hi = std::min(ny, p + M);
                ok[i][p] = (cnt[hi] - cnt[p]) > 0;
            }
        }
        cnt[0] = 0;
        for (i64 p = 1; p <= ny; ++p) cnt[p] = cnt[p - 1] + ok[i][p];
    }
    i64 prev = 0;
    for (i64 i = 1; i <= n; ++i) {
        const i64 lo = prev + 1;
        const i64 hi = i == 1 ? std::min(ny, firstMax) : std::min(ny, prev + M);
        i64 pick = -1;
        for (i64 p = lo; p <= hi; ++p)
            if (ok[i][p]) {
                pick = p;
                break;
            }
        if (pick < 0) return std::nullopt;
        out.phi.push_back(pick);
        prev = pick;
    }
    return out;
}

namespace {

bool lip_brute(const Bits& X, const Bits& Y, i64 M, i64 firstMax, std::size_t i, i64 prev) {
    if (i == X.size()) return true;
    const i64 ny = static_cast<i64>(Y.size());
    const i64 hi = i == 0 ? firstMax : prev + M;
    for (i64 p = prev + 1; p <= std::min(hi, ny); ++p)
        if (Y[p - 1] == X[i] && lip_brute(X, Y, M, firstMax, i + 1, p)) return true;
    return false;
}

}  // namespace

bool lipschitz_embed_bruteforce(const Bits& X, const Bits& Y, i64 M, i64 firstMax) {
    if (X.size() > 8 || Y.size() > 16) throw ResourceError("lipschitz_embed_bruteforce: sizes exceed 8/16");
    if (M < 1 || firstMax < 1) throw ContractError("lipschitz_embed_bruteforce: M and firstMax must be >= 1");
    return lip_brute(X, Y, M, firstMax, 0, 0);
}

// ---------------------------------------------------------------- compatibility

bool compatible_check(const Bits& X, const Bits& Y, const DeletionSets& d) {
    auto survivors = [](const Bits& S, const std::vector<i64>& del, Bits& out) {
        std::vector<char> gone(S.size() + 1, 0);
        for (i64 k : del) {
            if (k < 1 || k > static_cast<i64>(S.size()) || gone[k] || S[k - 1] != 0) return false;
            gone[k] = 1;
        }
        for (std::size_t k = 1; k <= S.size(); ++k)
            if (!gone[k]) out.push_back(S[k - 1]);
        return true;
    };
    Bits xs, ys;
    if (!survivors(X, d.D, xs) || !survivors(Y, d.Dprime, ys)) return false;
    const std::size_t m = std::min(xs.size(), ys.size());
    for (std::size_t k = 0; k < m; ++k)
        if (xs[k] == 1 && ys[k] == 1) return false;
    return true;
}

std::optional<DeletionSets> compatible_decide(const Bits& X, const Bits& Y) {
    const std::size_t n = X.size(), m = Y.size();
    // win[i][j]: from prefix state (i,j) some accepting state is reachable.
    std::vector<std::vector<char>> win(n + 1, std::vector<char>(m + 1, 0));
    for (std::size_t i = n + 1; i-- > 0;) {
        for (std::size_t j = m + 1; j-- > 0;) {
            if (i == n || j == m) {
                win[i][j] = 1;
                continue;
            }
            win[i][j] = (!(X[i] == 1 && Y[j] == 1) && win[i + 1][j + 1]) || (X[i] == 0 && win[i + 1][j]) ||
                        (Y[j] == 0 && win[i][j + 1]);
        }
    }
    if (!win[0][0]) return std::nullopt;
    DeletionSets d;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (!(X[i] == 1 && Y[j] == 1) && win[i + 1][j + 1]) {
            ++i;
            ++j;
        } else if (X[i] == 0 && win[i + 1][j]) {
            d.D.push_back(static_cast<i64>(++i));
        } else {
            d.Dprime.push_back(static_cast<i64>(++j));
        }
    }
    return d;
}

bool compatible_bruteforce(const Bits& X, const Bits& Y) {
    if (X.size() > 10 || Y.size() > 10) throw ResourceError("compatible_bruteforce: sizes exceed 10");
    auto zeros = [](const Bits& S) {
        std::vector<i64> z;
        for (std::size_t k = 0; k < S.size(); ++k)
            if (S[k] == 0) z.push_back(static_cast<i64>(k + 1));
        return z;
    };
    const auto zx = zeros(X), zy = zeros(Y);
    for (u64 mx = 0; mx < (u64(1) << zx.size()); ++mx) {
        DeletionSets d;
        for (std::size_t k = 0; k < zx.size(); ++k)
            if (mx >> k & 1) d.D.push_back(zx[k]);
        for (u64 my = 0; my < (u64(1) << zy.size()); ++my) {
            d.Dprime.clear();
            for (std::size_t k = 0; k < zy.size(); ++k)
                if (my >> k & 1) d.Dprime.push_back(zy[k]);
            if (compatible_check(X, Y, d)) return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------- rough isometry

bool rough_iso_verify(const std::vector<i64>& A, const std::vector<i64>& B, const RoughIsoMap& T) {
    std::vector<i64> sortedB(B);
    std::sort(sortedB.begin(), sortedB.end());
    std::vector<i64> img;
    img.reserve(A.size());
    for (i64 a : A) {
        auto it = T.assignment.find(a);
        if (it == T.assignment.end())
            throw ContractError("rough_iso_verify: point " + std::to_string(a) + " of A is unmapped");
        if (!std::binary_search(sortedB.begin(), sortedB.end(), it->second))
            throw ContractError("rough_iso_verify: image " + std::to_string(it->second) + " not in B");
        img.push_back(it->second);
    }
    for (std::size_t p = 0; p < A.size(); ++p)
        for (std::size_t q = p + 1; q < A.size(); ++q) {
            const Rational dx(std::abs(A[p] - A[q]));
            const Rational dy(std::abs(img[p] - img[q]));
            if (dx / T.M - T.D > dy) return false;
            if (dy > T.M * dx + T.D) return false;
        }
    std::vector<i64> sortedImg(img);
    std::sort(sortedImg.begin(), sortedImg.end());
    for (i64 y : sortedB) {
        if (sortedImg.empty()) return false;
        auto it = std::lower_bound(sortedImg.begin(), sortedImg.end(), y);
        i64 best = -1;
        if (it != sortedImg.end()) best = *it - y;
        if (it != sortedImg.begin()) {
            const i64 d = y - *(it - 1);
            if (best < 0 || d < best) best = d;
        }
        if (Rational(best) > T.C) return false;
    }
    return true;
}

namespace {

struct IsoSearch {
    const std::vector<i64>& A;
    const std::vector<i64>& B;
    RoughIsoMap T;
    bool monotone;
    std::vector<std::size_t> pick;

    bool rec(std::size_t k, std::size_t minIdx) {
        if (k == A.size()) {
            T.assignment.clear();
            for (std::size_t i = 0; i < A.size(); ++i) T.assignment[A[i]] = B[pick[i]];
            return rough_iso_verify(A, B, T);
        }
        for (std::size_t b = monotone ? minIdx : 0; b < B.size(); ++b) {
            pick[k] = b;
            if (rec(k + 1, b)) return true;
        }
        return false;
    }
};

}  // namespace

std::optional<RoughIsoMap> rough_iso_search(const std::vector<i64>& A0, const std::vector<i64>& B0,
                                            const Rational& M, const Rational& D, const Rational& C,
                                            bool monotoneOnly) {
    if (A0.size() > 10 || B0.size() > 10) throw ResourceError("rough_iso_search: sizes exceed 10");
    if (!monotoneOnly && std::pow(double(B0.size()), double(A0.size())) > 1e7)
        throw ResourceError("rough_iso_search: |B|^|A| exceeds 1e7");
    std::vector<i64> A(A0), B(B0);
    std::sort(A.begin(), A.end());
    std::sort(B.begin(), B.end());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    B.erase(std::unique(B.begin(), B.end()), B.end());
    if (B.empty()) {
        if (!A.empty()) return std::nullopt;
        return RoughIsoMap{{}, M, D, C};
    }
    IsoSearch s{A, B, RoughIsoMap{{}, M, D, C}, monotoneOnly, std::vector<std::size_t>(A.size())};
    if (s.rec(0, 0)) return s.T;
    return std::nullopt;
}

}  // namespace mse

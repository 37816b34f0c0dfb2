#include "mse/rembed.hpp"

#include <sstream>

namespace mse {

StepConstants step_constants(i64 R) { return {2 * R, 1, 3 * R * R}; }

StepConstants step_constants(const ScaleRecord& s) {
    return {to_i64(s.Rj, "R_j"), to_i64(s.Rminus, "R_j^-"), to_i64(s.Rplus, "R_j^+")};
}

StepKind step_kind(i64 dx, i64 dy, const StepConstants& c) {
    if (dx == 1 && dy == 1) return StepKind::Paired;
    if (dx == c.R0 && dy >= c.R0minus && dy <= c.R0plus) return StepKind::XJump;
    if (dy == c.R0 && dx >= c.R0minus && dx <= c.R0plus) return StepKind::YJump;
    return StepKind::Invalid;
}

namespace {

// run[a] = length of the maximal good run starting at position a (0-based).
std::vector<i64> good_runs(i64 n, const std::function<bool(i64)>& good) {
    std::vector<i64> run(n + 1, 0);
    for (i64 a = n - 1; a >= 0; --a) run[a] = good(a) ? run[a + 1] + 1 : 0;
    return run;
}

}  // namespace

std::optional<EmbedWitness> rembed_decide(i64 n, i64 nPrime, const EmbedOracles& o, double workCap) {
    if (n < 0 || nPrime < 0) throw ContractError("rembed_decide: negative length");
    const double work = double(n + 1) * double(nPrime + 1) * double(std::max<i64>(o.c.R0plus, 1));
    if (work > workCap) {
        std::ostringstream os;
        os << "rembed_decide: work n*n'*R0+ = " << n << "*" << nPrime << "*" << o.c.R0plus
           << " exceeds cap " << workCap;
        throw ResourceError(os.str());
    }
    const auto runX = good_runs(n, o.goodX);
    const auto runY = good_runs(nPrime, o.goodY);
    const i64 W = nPrime + 1;
    std::vector<char> feas(static_cast<std::size_t>((n + 1) * W), 0);
    auto F = [&](i64 a, i64 b) -> char& { return feas[static_cast<std::size_t>(a * W + b)]; };
    const auto& c = o.c;

    auto xjump = [&](i64 a, i64 b, i64 t) {
        return a + c.R0 <= n && runX[a] >= c.R0 && b + t <= nPrime && runY[b] >= t;
    };
    auto yjump = [&](i64 a, i64 b, i64 t) {
        return b + c.R0 <= nPrime && runY[b] >= c.R0 && a + t <= n && runX[a] >= t;
    };

    for (i64 a = n; a >= 0; --a) {
        for (i64 b = nPrime; b >= 0; --b) {
            if (a == n && b == nPrime) {
                F(a, b) = 1;
                continue;
            }
            bool ok = false;
            if (a < n && b < nPrime && F(a + 1, b + 1) && o.pairEmbed(a, b)) ok = true;
            for (i64 t = c.R0minus; !ok && t <= c.R0plus; ++t)
                if (xjump(a, b, t) && F(a + c.R0, b + t)) ok = true;
            for (i64 t = c.R0minus; !ok && t <= c.R0plus; ++t)
                if (yjump(a, b, t) && F(a + t, b + c.R0)) ok = true;
            F(a, b) = ok;
        }
    }
    if (!F(0, 0)) return std::nullopt;

    EmbedWitness w;
    i64 a = 0, b = 0;
    w.iSeq.push_back(0);
    w.iPrimeSeq.push_back(0);
    while (a != n || b != nPrime) {
        i64 na = -1, nb = -1;
        if (a < n && b < nPrime && F(a + 1, b + 1) && o.pairEmbed(a, b)) {
            na = a + 1;
            nb = b + 1;
        }
        for (i64 t = c.R0minus; na < 0 && t <= c.R0plus; ++t)
            if (xjump(a, b, t) && F(a + c.R0, b + t)) {
                na = a + c.R0;
                nb = b + t;
            }
        for (i64 t = c.R0minus; na < 0 && t <= c.R0plus; ++t)
            if (yjump(a, b, t) && F(a + t, b + c.R0)) {
                na = a + t;
                nb = b + c.R0;
            }
        if (na < 0) throw InvariantError("rembed_decide: feasible state without a feasible successor");
        a = na;
        b = nb;
        w.iSeq.push_back(a);
        w.iPrimeSeq.push_back(b);
    }
    return w;
}

bool rembed_verify(i64 n, i64 nPrime, const EmbedWitness& w, const EmbedOracles& o) {
    const auto& I = w.iSeq;
    const auto& J = w.iPrimeSeq;
    if (I.empty() || I.size() != J.size()) return false;
    if (I.front() != 0 || J.front() != 0 || I.back() != n || J.back() != nPrime) return false;
    for (std::size_t r = 0; r + 1 < I.size(); ++r) {
        const i64 dx = I[r + 1] - I[r], dy = J[r + 1] - J[r];
        if (dx <= 0 || dy <= 0) return false;
        switch (step_kind(dx, dy, o.c)) {
            case StepKind::Paired:
                if (!o.pairEmbed(I[r], J[r])) return false;
                break;
            case StepKind::XJump:
            case StepKind::YJump:
                for (i64 a = I[r]; a < I[r + 1]; ++a)
                    if (!o.goodX(a)) return false;
                for (i64 b = J[r]; b < J[r + 1]; ++b)
                    if (!o.goodY(b)) return false;
                break;
            case StepKind::Invalid:
                return false;
        }
    }
    return true;
}

namespace {

bool segment_good(i64 from, i64 len, const std::function<bool(i64)>& good) {
    for (i64 k = from; k < from + len; ++k)
        if (!good(k)) return false;
    return true;
}

bool brute(i64 a, i64 b, i64 n, i64 nPrime, const EmbedOracles& o) {
    if (a == n && b == nPrime) return true;
    const auto& c = o.c;
    if (a < n && b < nPrime && o.pairEmbed(a, b) && brute(a + 1, b + 1, n, nPrime, o)) return true;
    for (i64 t = c.R0minus; t <= c.R0plus; ++t) {
        if (a + c.R0 <= n && b + t <= nPrime && segment_good(a, c.R0, o.goodX) && segment_good(b, t, o.goodY) &&
            brute(a + c.R0, b + t, n, nPrime, o))
            return true;
        if (b + c.R0 <= nPrime && a + t <= n && segment_good(b, c.R0, o.goodY) && segment_good(a, t, o.goodX) &&
            brute(a + t, b + c.R0, n, nPrime, o))
            return true;
    }
    return false;
}

}  // namespace

bool rembed_bruteforce(i64 n, i64 nPrime, const EmbedOracles& o) {
    if (n > 12 || nPrime > 12)
        throw ResourceError("rembed_bruteforce: sizes " + std::to_string(n) + "," + std::to_string(nPrime) +
                            " exceed 12");
    return brute(0, 0, n, nPrime, o);
}

EmbedOracles symbol_oracles(const ProblemSpec& spec, const SymbolSeq& X, const SymbolSeq& Y,
                            const StepConstants& c) {
    EmbedOracles o;
    o.pairEmbed = [&spec, &X, &Y](i64 a, i64 b) { return spec.related(X[a], Y[b]); };
    o.goodX = [&spec, &X](i64 a) { return spec.good(Side::X, X[a]); };
    o.goodY = [&spec, &Y](i64 b) { return spec.good(Side::Y, Y[b]); };
    o.c = c;
    return o;
}

std::optional<EmbedWitness> rembed_decide(const SymbolSeq& X, const SymbolSeq& Y, const ProblemSpec& spec,
                                          const StepConstants& c, double workCap) {
    return rembed_decide(static_cast<i64>(X.size()), static_cast<i64>(Y.size()), symbol_oracles(spec, X, Y, c),
                         workCap);
}

}  // namespace mse

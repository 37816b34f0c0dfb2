#include "mse/experiments.hpp"

#include "mse/deciders.hpp"
#include "mse/encodings.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace mse {

namespace {

// Stream tags, one per experiment.
constexpr u64 kTail = 1, kMoment = 2, kGood = 3, kMinM = 4, kCompat = 5;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <class V>
std::string join(const std::vector<V>& v) {
    std::ostringstream os;
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << fmt(static_cast<double>(v[k]));
    return os.str();
}

u64 key_bits(double d) {
    u64 b;
    std::memcpy(&b, &d, sizeof b);
    return b;
}

ExperimentRow proportion_row(std::vector<double> keys, i64 k, i64 n) {
    ExperimentRow r;
    r.keys = std::move(keys);
    r.successes = k;
    r.trials = n;
    r.estimate = n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
    if (n > 0) {
        const auto iv = clopper_pearson(k, n);
        r.lo = to_double(iv.lo);
        r.hi = to_double(iv.hi);
    } else {
        r.lo = 0;
        r.hi = 1;
    }
    return r;
}

double scale_L(const ParameterSet& ps, int j) {
    return to_double(Rational(scales(ps, j, 4096).L));
}

ExperimentResult header(const std::string& name, u64 seed, i64 trials, std::vector<std::string> keys) {
    if (trials <= 0) throw ContractError(name + ": trials must be positive");
    ExperimentResult r;
    r.name = name;
    r.seed = seed;
    r.trials = trials;
    r.keyColumns = std::move(keys);
    return r;
}

void put_common(ExperimentResult& r, int j, const ParameterSet& ps, const ProblemSpec& spec, Side side) {
    r.params["level"] = std::to_string(j);
    r.params["profile"] = ps.name;
    r.params["params"] = "alpha=" + std::to_string(ps.alpha) + ",beta=" + std::to_string(ps.beta) +
                         ",delta=" + std::to_string(ps.delta) + ",m=" + std::to_string(ps.m) +
                         ",k0=" + std::to_string(ps.k0) + ",R=" + std::to_string(ps.R) +
                         ",L0=" + std::to_string(ps.L0);
    r.params["spec"] = spec.name;
    r.params["side"] = side_name(side);
}

// Sampler and goodness oracle for level-j blocks of one side, j <= 1.
struct LevelTools {
    BlockSampler sampler;
    GoodOracle good;
};

LevelTools level_tools(int j, const ParameterSet& ps, const ProblemSpec& spec, Side side) {
    const auto base = symbol_sampler(spec, side);
    const auto g0 = symbol_good(spec, side);
    if (j == 0) return {base, g0};
    if (j == 1) {
        GoodOracle g1 = [spec, side, ps](const Block& b) { return is_good_level1(b.chars, side, spec, ps).good; };
        return {level_sampler(1, base, {g0}, ps), g1};
    }
    throw ResourceError("block sampling above level 1 is out of reach (requested level " + std::to_string(j) + ")");
}

}  // namespace

Rational tail_exact_level0(const ProblemSpec& spec, Side side, const Rational& p) {
    Rational sum = 0;
    if (!spec.gapM0) {
        for (std::size_t k = 0; k < spec.size(side); ++k) {
            const auto S = symbol_S0(spec, side, static_cast<int>(k));
            if (S.lo != S.hi) throw ContractError("tail_exact_level0: spec has untabulated mass");
            if (S.lo <= p) sum += spec.mu(side)[k];
        }
        return sum;
    }
    // Gap classes: S_0(C_k) decreases for k > 2 M0, so once it drops to p the remaining mass all counts.
    const int M0 = *spec.gapM0;
    Rational cum = 0;
    for (int k = 0;; ++k) {
        if (k > 24) throw ResourceError("tail_exact_level0: threshold below the reachable gap classes");
        const Rational mass = gap_class_mass(k);
        const auto S = symbol_S0(spec, side, k);
        if (k > 2 * M0 && S.lo <= p) return sum + (1 - cum);
        if (S.lo <= p) sum += mass;
        cum += mass;
    }
}

ExperimentResult tail_curve(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials,
                            const std::vector<double>& pGrid, u64 seed, Side side, i64 innerTrials,
                            const RunOptions& opt) {
    auto res = header("tail", seed, trials, {"p"});
    put_common(res, j, ps, spec, side);
    res.params["p"] = join(pGrid);
    if (j > 1) throw ResourceError("tail_curve: level " + std::to_string(j) + " blocks cannot be sampled");
    if (j == 1) {
        if (innerTrials <= 0) throw ContractError("tail_curve: innerTrials must be positive");
        res.params["inner_trials"] = std::to_string(innerTrials);
    }
    const auto own = level_tools(j, ps, spec, side);
    const auto partner = level_tools(j, ps, spec, other(side));

    // Per trial: the S interval [lo, hi] of the sampled block.
    using Interval = std::pair<double, double>;
    const auto samples = run_trials<Interval>(trials, opt, [&](i64 t) -> Interval {
        Rng rng = rng_stream(seed, stream_key({kTail, static_cast<u64>(j), static_cast<u64>(t)}));
        const Block b = own.sampler(false, rng);
        if (j == 0) {
            const auto S = symbol_S0(spec, side, b.chars[0]);
            return {to_double(S.lo), to_double(S.hi)};
        }
        i64 hits = 0;
        for (i64 i = 0; i < innerTrials; ++i) {
            const Block y = partner.sampler(false, rng);
            const bool e = side == Side::X ? chars_embed(spec, b.chars, y.chars, ps.R)
                                           : chars_embed(spec, y.chars, b.chars, ps.R);
            hits += e;
        }
        const double s = static_cast<double>(hits) / static_cast<double>(innerTrials);
        return {s, s};
    });

    const auto sc = scales(ps, j, 4096);
    const double mj = to_double(sc.mj);
    const double logL = std::log(to_double(Rational(sc.L)));
    for (double p : pGrid) {
        i64 k = 0, unknown = 0;
        for (const auto& [lo, hi] : samples) {
            if (hi <= p) ++k;
            else if (lo <= p) ++unknown;
        }
        auto row = proportion_row({p}, k, trials);
        row.unknown = unknown;
        row.reference = p <= 0 ? 0.0 : std::exp(mj * std::log(p) - static_cast<double>(ps.beta) * logL);
        res.rows.push_back(std::move(row));
    }
    return res;
}

ExperimentResult length_moment(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials, u64 seed,
                               std::optional<i64> forcedW, const RunOptions& opt) {
    auto res = header("length-moment", seed, trials, {"x"});
    put_common(res, j, ps, spec, Side::X);
    if (forcedW) res.params["forced_W"] = std::to_string(*forcedW);
    if (j < 1) throw ContractError("length_moment: level must be at least 1");
    if (j > 2) throw ResourceError("length_moment: level " + std::to_string(j) + " blocks cannot be sampled");
    const auto sub = level_tools(j - 1, ps, spec, Side::X);

    const auto lengths = run_trials<i64>(trials, opt, [&](i64 t) -> i64 {
        Rng rng = rng_stream(seed, stream_key({kMoment, static_cast<u64>(j), static_cast<u64>(t)}));
        const Block b = sample_block(j, sub.sampler, sub.good, ps, rng, kDefaultScanHorizon, forcedW);
        return static_cast<i64>(b.subs.size());
    });

    const double Lj = scale_L(ps, j);
    const double L6 = std::pow(scale_L(ps, j - 1), 6);
    const double centre = (2.0 - std::ldexp(1.0, -j)) * Lj;

    // Fixed-order Welford reduction.
    double mean = 0, m2 = 0;
    i64 n = 0;
    for (i64 len : lengths) {
        const double v = std::exp((static_cast<double>(len) - centre) / L6);
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    ExperimentRow m;
    m.keys = {0};
    m.estimate = mean;
    m.successes = -1;
    m.trials = n;
    const double sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    m.lo = mean - 1.96 * sd / std::sqrt(static_cast<double>(n));
    m.hi = mean + 1.96 * sd / std::sqrt(static_cast<double>(n));
    m.reference = 1.0;
    res.rows.push_back(m);

    for (int x = 1; x <= 3; ++x) {
        const double thr = centre + x * L6;
        i64 k = 0;
        for (i64 len : lengths) k += static_cast<double>(len) > thr;
        auto row = proportion_row({static_cast<double>(x)}, k, n);
        row.reference = std::exp(-static_cast<double>(x));
        res.rows.push_back(std::move(row));
    }
    return res;
}

ExperimentResult good_fraction(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials, u64 seed,
                               Side side, const RunOptions& opt) {
    auto res = header("good-fraction", seed, trials, {"level"});
    put_common(res, j, ps, spec, side);
    const auto tools = level_tools(j, ps, spec, side);

    // 1 good, 0 not good, -1 undecided.
    const auto verdicts = run_trials<int>(trials, opt, [&](i64 t) -> int {
        Rng rng = rng_stream(seed, stream_key({kGood, static_cast<u64>(j), static_cast<u64>(t)}));
        const Block b = tools.sampler(false, rng);
        try {
            return tools.good(b) ? 1 : 0;
        } catch (const ContractError&) {
            return -1;
        }
    });
    i64 k = 0, unknown = 0;
    for (int v : verdicts) {
        k += v == 1;
        unknown += v < 0;
    }
    auto row = proportion_row({static_cast<double>(j)}, k, trials - unknown);
    row.unknown = unknown;
    row.reference = 1.0 - std::pow(scale_L(ps, j), -static_cast<double>(ps.delta));
    res.rows.push_back(std::move(row));
    return res;
}

ExperimentResult minimal_M_curve(const std::vector<i64>& nGrid, const std::vector<i64>& MGrid, i64 trials, u64 seed,
                                 const RunOptions& opt) {
    auto res = header("minimal-M", seed, trials, {"n", "M"});
    res.params["n"] = join(nGrid);
    res.params["M"] = join(MGrid);
    for (i64 n : nGrid) {
        if (n < 0) throw ContractError("minimal_M_curve: negative n");
        for (i64 M : MGrid) {
            if (M < 1) throw ContractError("minimal_M_curve: M must be positive");
            const auto hits = run_trials<char>(trials, opt, [&](i64 t) -> char {
                Rng rng = rng_stream(seed, stream_key({kMinM, static_cast<u64>(n), static_cast<u64>(M),
                                                       static_cast<u64>(t)}));
                Bits X(static_cast<std::size_t>(n)), Y(static_cast<std::size_t>(n * M));
                for (auto& b : X) b = rng.bernoulli(0.5);
                for (auto& b : Y) b = rng.bernoulli(0.5);
                return lipschitz_embed_greedy(X, Y, M, M).has_value();
            });
            i64 k = 0;
            for (char h : hits) k += h;
            res.rows.push_back(proportion_row({static_cast<double>(n), static_cast<double>(M)}, k, trials));
        }
    }
    return res;
}

ExperimentResult compatibility_q_curve(const std::vector<double>& qGrid, i64 n, i64 trials, u64 seed,
                                       const RunOptions& opt) {
    auto res = header("compatibility-q", seed, trials, {"q"});
    res.params["q"] = join(qGrid);
    res.params["n"] = std::to_string(n);
    if (n < 0) throw ContractError("compatibility_q_curve: negative n");
    for (double q : qGrid) {
        if (!(q >= 0 && q <= 1)) throw ContractError("compatibility_q_curve: q outside [0,1]");
        const auto hits = run_trials<char>(trials, opt, [&](i64 t) -> char {
            Rng rng = rng_stream(seed, stream_key({kCompat, key_bits(q), static_cast<u64>(t)}));
            Bits X(static_cast<std::size_t>(n)), Y(static_cast<std::size_t>(n));
            for (auto& b : X) b = rng.bernoulli(q);
            for (auto& b : Y) b = rng.bernoulli(q);
            return compatible_decide(X, Y).has_value();
        });
        i64 k = 0;
        for (char h : hits) k += h;
        res.rows.push_back(proportion_row({q}, k, trials));
    }
    return res;
}

}  // namespace mse

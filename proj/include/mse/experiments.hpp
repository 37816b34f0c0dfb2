#pragma once

#include "mse/blocks.hpp"
#include "mse/classify.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <thread>

namespace mse {

struct ExperimentRow {
    std::vector<double> keys;  // one value per ExperimentResult::keyColumns entry
    double estimate = 0;
    double lo = 0, hi = 0;     // 95% interval
    i64 successes = 0;         // for proportions; -1 for means
    i64 trials = 0;
    std::optional<double> reference;
    i64 unknown = 0;           // trials whose classification stayed undecided
};

struct ExperimentResult {
    std::string name;
    std::map<std::string, std::string> params;  // descriptor, printed in key order
    u64 seed = 0;
    i64 trials = 0;
    std::vector<std::string> keyColumns;
    std::vector<ExperimentRow> rows;
};

struct RunOptions {
    unsigned workers = 1;  // 0: hardware concurrency
};

// Runs fn(t) for t in [0, trials) on `workers` threads; results are indexed by t, so aggregation does not
// depend on the worker count. The first exception raised by a trial is rethrown.
template <class T>
std::vector<T> run_trials(i64 trials, const RunOptions& opt, const std::function<T(i64)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(std::max<i64>(trials, 0)));
    unsigned w = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    w = static_cast<unsigned>(std::min<i64>(w, std::max<i64>(trials, 1)));
    std::vector<std::exception_ptr> errs(w);
    auto work = [&](unsigned id) {
        try {
            for (i64 t = id; t < trials; t += w) out[static_cast<std::size_t>(t)] = fn(t);
        } catch (...) {
            errs[id] = std::current_exception();
        }
    };
    if (w == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < w; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

// P(S_j <= p) over sampled blocks; j = 0 uses exact S_0, j = 1 estimates S_1 with innerTrials partner draws.
ExperimentResult tail_curve(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials,
                            const std::vector<double>& pGrid, u64 seed, Side side = Side::X, i64 innerTrials = 200,
                            const RunOptions& opt = {});
// Exact P(S_0 <= p) from mu.
Rational tail_exact_level0(const ProblemSpec& spec, Side side, const Rational& p);

// Row 0: E exp(L_{j-1}^-6 (|X| - (2 - 2^-j) L_j)) with reference 1, |X| counted in level-(j-1) sub-blocks.
// Rows x = 1, 2, 3: P(|X| > (2 - 2^-j) L_j + x L_{j-1}^6) with reference e^-x.
ExperimentResult length_moment(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials, u64 seed,
                               std::optional<i64> forcedW = std::nullopt, const RunOptions& opt = {});

// Fraction of sampled level-j blocks that are good; reference 1 - L_j^-delta.
ExperimentResult good_fraction(int j, const ParameterSet& ps, const ProblemSpec& spec, i64 trials, u64 seed,
                               Side side = Side::X, const RunOptions& opt = {});

// P(length-n Bernoulli(1/2) prefix M-embeds into an independent length-Mn prefix), first image <= M.
ExperimentResult minimal_M_curve(const std::vector<i64>& nGrid, const std::vector<i64>& MGrid, i64 trials, u64 seed,
                                 const RunOptions& opt = {});

// P(two independent length-n Bernoulli(q) sequences are compatible).
ExperimentResult compatibility_q_curve(const std::vector<double>& qGrid, i64 n, i64 trials, u64 seed,
                                       const RunOptions& opt = {});

}  // namespace mse

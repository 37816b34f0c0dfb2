#include "doctest.h"
#include "mse/encodings.hpp"
#include "mse/experiments.hpp"

#include <bit>
#include <cmath>

using namespace mse;

namespace {

bool same_rows(const ExperimentResult& a, const ExperimentResult& b) {
    if (a.rows.size() != b.rows.size() || a.params != b.params) return false;
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        const auto &x = a.rows[k], &y = b.rows[k];
        if (x.keys != y.keys || x.estimate != y.estimate || x.lo != y.lo || x.hi != y.hi ||
            x.successes != y.successes || x.unknown != y.unknown || x.reference != y.reference)
            return false;
    }
    return true;
}

bool covers(const ExperimentRow& r, double v) { return r.lo <= v && v <= r.hi; }

}  // namespace

TEST_CASE("level-0 compatible tail is a two-point step at 1 - q") {
    const auto spec = compatible_spec(Rational(3, 10));
    const std::vector<double> grid{0.0, 0.5, 0.69, 0.7, 0.9, 1.0};
    const auto r = tail_curve(0, profile("micro"), spec, 4000, grid, 11);
    REQUIRE(r.rows.size() == grid.size());
    CHECK(r.rows[0].successes == 0);
    CHECK(r.rows[1].successes == 0);
    CHECK(r.rows[2].successes == 0);
    // S_0(0) = 1 and S_0(1) = 0.7, so the tail is P(symbol 1) = q from 0.7 on until 1.
    CHECK(covers(r.rows[3], 0.3));
    CHECK(r.rows[3].successes == r.rows[4].successes);
    CHECK(r.rows[5].successes == 4000);
    CHECK(tail_exact_level0(spec, Side::X, Rational(7, 10)) == Rational(3, 10));
    CHECK(tail_exact_level0(spec, Side::X, Rational(69, 100)) == 0);
    for (const auto& row : r.rows) CHECK(row.reference.has_value());
}

TEST_CASE("rough-iso level-0 tail matches the exact sum over gap classes") {
    const auto spec = roughiso_spec(2, 12);
    const std::vector<double> grid{0.001, 0.05, 0.2, 0.5, 0.9, 0.999};
    const auto r = tail_curve(0, profile("micro"), spec, 20000, grid, 3);
    int covered = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double exact = to_double(tail_exact_level0(spec, Side::X, from_double(grid[k])));
        covered += covers(r.rows[k], exact);
        // Independent oracle: direct sum of class masses with S_0 below the threshold, far enough out.
        Rational direct = 0;
        for (int c = 0; c <= 16; ++c) {
            Rational S = 0;
            for (int i = std::max(0, c - 2); i <= c + 2; ++i) S += gap_class_mass(i);
            if (S <= from_double(grid[k])) direct += gap_class_mass(c);
        }
        CHECK(std::abs(to_double(direct) - exact) < 1e-12);
    }
    CHECK(covered >= 5);
}

TEST_CASE("exact tail values are covered by seeded intervals at the nominal rate") {
    const auto spec = compatible_spec(Rational(1, 2));
    int covered = 0;
    for (u64 seed = 0; seed < 40; ++seed) {
        const auto r = tail_curve(0, profile("micro"), spec, 200, {0.5}, seed);
        covered += covers(r.rows[0], 0.5);
    }
    CHECK(covered >= 36);
}

TEST_CASE("tail_curve at level 1 is reproducible and independent of the worker count") {
    const auto ps = profile("nano");
    const auto spec = compatible_spec(Rational(1, 20));
    const std::vector<double> grid{0.5, 0.9, 0.99};
    const auto a = tail_curve(1, ps, spec, 30, grid, 5, Side::X, 40);
    const auto b = tail_curve(1, ps, spec, 30, grid, 5, Side::X, 40);
    RunOptions four;
    four.workers = 4;
    const auto c = tail_curve(1, ps, spec, 30, grid, 5, Side::X, 40, four);
    CHECK(same_rows(a, b));
    CHECK(same_rows(a, c));
    CHECK(a.params.at("inner_trials") == "40");
    CHECK(a.rows[0].successes <= a.rows[1].successes);
    CHECK(a.rows[1].successes <= a.rows[2].successes);
    CHECK_THROWS_AS(tail_curve(2, ps, spec, 1, grid, 5), ResourceError);
}

TEST_CASE("length moment") {
    const auto ps = profile("micro");
    SUBCASE("forced W = 0 with an all-good spec gives a deterministic length") {
        const auto spec = compatible_spec(Rational(0));
        const auto r = length_moment(1, ps, spec, 50, 9, i64{0});
        Rng rng = rng_stream(1, 1);
        const Block b = sample_block(1, symbol_sampler(spec, Side::X), symbol_good(spec, Side::X), ps, rng,
                                     kDefaultScanHorizon, i64{0});
        const double n = static_cast<double>(b.subs.size());
        // L_0 = 4, L_1 = 64: L^3 good, no W, then the first 2L^3 good run ends at its midpoint.
        CHECK(n == 64 + 16 + 64);
        const double exact = std::exp((n - 1.5 * 64) / 4096.0);
        CHECK(r.rows[0].estimate == doctest::Approx(exact).epsilon(1e-12));
        CHECK(r.rows[0].lo == doctest::Approx(exact).epsilon(1e-12));
        CHECK(r.rows[0].hi == doctest::Approx(exact).epsilon(1e-12));
        CHECK(r.rows[0].successes == -1);
        for (int x = 1; x <= 3; ++x) CHECK(r.rows[static_cast<std::size_t>(x)].successes == 0);
    }
    SUBCASE("micro level 1 tails sit under e^-x") {
        const auto spec = compatible_spec(Rational(1, 1000));
        const auto r = length_moment(1, ps, spec, 2000, 21);
        REQUIRE(r.rows.size() == 4);
        CHECK(r.rows[0].lo <= r.rows[0].hi);
        for (int x = 1; x <= 3; ++x) {
            const auto& row = r.rows[static_cast<std::size_t>(x)];
            CHECK(row.keys[0] == x);
            CHECK(*row.reference == doctest::Approx(std::exp(-x)));
            CHECK(row.estimate <= *row.reference + 2 * (row.hi - row.lo));
        }
    }
    SUBCASE("worker independence") {
        const auto spec = compatible_spec(Rational(1, 1000));
        RunOptions three;
        three.workers = 3;
        CHECK(same_rows(length_moment(1, ps, spec, 200, 4), length_moment(1, ps, spec, 200, 4, std::nullopt, three)));
    }
}

TEST_CASE("good fraction") {
    const auto ps = profile("micro");
    SUBCASE("q = 0: fraction 1 at level 0; at level 1 only the length bound can fail") {
        const auto spec = compatible_spec(Rational(0));
        CHECK(good_fraction(0, ps, spec, 500, 1).rows[0].estimate == 1.0);
        // Length 144 + W must stay within 1040, W ~ Geom(4^-4).
        const double exact = 1 - std::pow(1 - 1.0 / 256, 1040 - 144 + 1);
        CHECK(covers(good_fraction(1, ps, spec, 2000, 1).rows[0], exact));
    }
    SUBCASE("Lipschitz Y side: the fraction estimates the star mass, checked by word enumeration") {
        const int M0 = 16;
        const auto spec = lipschitz_spec(M0, 1);
        i64 stars = 0;
        for (u64 w = 0; w < (u64{1} << M0); ++w)
            stars += std::popcount((w ^ (w >> 1)) & ((u64{1} << (M0 - 1)) - 1)) >= 6;
        const double exact = static_cast<double>(stars) / std::ldexp(1.0, M0);
        CHECK(spec.muY[2] == Rational(stars, i64{1} << M0));
        const auto r = good_fraction(0, ps, spec, 20000, 8, Side::Y);
        CHECK(covers(r.rows[0], exact));
        CHECK(r.rows[0].unknown == 0);
    }
    SUBCASE("micro level 1 Bernoulli spec is reported with an interval and reference") {
        const auto r = good_fraction(1, ps, compatible_spec(Rational(1, 1000)), 200, 2);
        CHECK(r.rows[0].lo <= r.rows[0].estimate);
        CHECK(r.rows[0].estimate <= r.rows[0].hi);
        CHECK(*r.rows[0].reference == doctest::Approx(1 - std::pow(64.0, -3)));
    }
}

TEST_CASE("minimal M curve") {
    SUBCASE("M = 1, n = 1 is a single-symbol match") {
        const auto r = minimal_M_curve({1}, {1}, 20000, 7);
        CHECK(covers(r.rows[0], 0.5));
    }
    SUBCASE("M = 2 decays with n") {
        const auto r = minimal_M_curve({10, 40}, {2}, 4000, 7);
        REQUIRE(r.rows.size() == 2);
        CHECK(r.rows[1].estimate < r.rows[0].estimate);
    }
    SUBCASE("nondecreasing in M at fixed n up to interval width") {
        const auto r = minimal_M_curve({12}, {1, 2, 3, 4}, 2000, 3);
        for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k].hi >= r.rows[k - 1].lo);
    }
    SUBCASE("worker independence") {
        RunOptions two;
        two.workers = 2;
        CHECK(same_rows(minimal_M_curve({5, 9}, {1, 3}, 300, 1), minimal_M_curve({5, 9}, {1, 3}, 300, 1, two)));
    }
}

TEST_CASE("compatibility q curve") {
    const auto r = compatibility_q_curve({0.0, 0.05, 0.2, 0.4, 1.0}, 50, 2000, 7);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows[0].successes == 2000);
    CHECK(r.rows[4].successes == 0);
    for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k].estimate <= r.rows[k - 1].estimate);
    CHECK_THROWS_AS(compatibility_q_curve({1.5}, 5, 10, 1), ContractError);
}

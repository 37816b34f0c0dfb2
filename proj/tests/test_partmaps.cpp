#include "doctest.h"
#include "mse/partmaps.hpp"

#include <random>

using namespace mse;

namespace {

constexpr i64 P48 = i64(1) << 48;
constexpr i64 P52 = i64(1) << 52;

i64 ifloor_test(const Rational& q) { return to_i64(numerator(q) / denominator(q), "floor"); }

std::vector<i64> sorted(std::vector<i64> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<i64> random_bad(std::mt19937_64& g, i64 n, i64 margin, int count) {
    std::uniform_int_distribution<i64> d(margin + 1, n - margin - 1);
    std::vector<i64> v;
    for (int k = 0; k < count; ++k) v.push_back(d(g));
    return sorted(v);
}

void check_family(const MappingFamily& f, const std::vector<i64>& B, const std::vector<i64>& Bp, int j,
                  const ParameterSet& ps, bool h1) {
    const i64 L2 = to_i64(pow_int(scales(ps, j).L, 2), "L2");
    CHECK(f.count == L2);
    std::mt19937_64 g(7);
    std::vector<i64> hs{1, 2, f.count / 2, f.count, std::uniform_int_distribution<i64>(1, f.count)(g)};
    const auto base = f.member_pair(1);
    for (i64 h : hs) {
        const auto mp = f.member_pair(h);
        const auto gm = f.member(h);
        CHECK(check_admissible(gm));
        if (h1) {
            CHECK(check_class_H1(gm, B, j, ps));
        } else {
            CHECK(check_class_G(gm, B, Bp, j, ps));
            CHECK(check_marked_conditions(mp, B, Bp, j, ps));
        }
        // Shift identities: X cuts fixed, shifted Y cuts move by h - 1, the rest stay.
        CHECK(mp.P == base.P);
        CHECK(mp.marked == base.marked);
        for (std::size_t k = 0; k < mp.Pp.size(); ++k) {
            const bool shifted = k >= f.shiftFrom && k <= f.shiftTo;
            CHECK(mp.Pp[k] == base.Pp[k] + (shifted ? h - 1 : 0));
        }
        CHECK(mp.Pp.front() == 0);
    }
    // Distinct members map the first marked block to distinct images.
    if (!B.empty()) {
        const auto a = f.member(1).image(B.front());
        const auto b = f.member(f.count).image(B.front());
        REQUIRE(a);
        REQUIRE(b);
        CHECK(*b - *a == f.count - 1);
    }
}

}  // namespace

TEST_CASE("induce_mapping builds segments and rejects malformed pairs") {
    MarkedPartitionPair m{{0, 3, 5, 9}, {0, 4, 6, 8}, {false, true, false}};
    const auto gm = induce_mapping(m);
    REQUIRE(gm.segs.size() == 3);
    CHECK(gm.segs[1].singles);
    CHECK(gm.block_count() == 1 + 2 + 1);
    CHECK(gm.image(4) == 5);
    CHECK(gm.image(5) == 6);
    CHECK(gm.preimage(6) == 5);
    CHECK_FALSE(gm.image(2));
    CHECK(gm.x_singleton(4));
    CHECK_FALSE(gm.x_singleton(1));
    CHECK(check_admissible(gm));

    MarkedPartitionPair bad{{0, 3, 5}, {0, 4, 7}, {false, true}};
    CHECK_THROWS_AS(induce_mapping(bad), ContractError);
    MarkedPartitionPair nonmono{{0, 3, 3}, {0, 1, 2}, {false, false}};
    CHECK_THROWS_AS(induce_mapping(nonmono), ContractError);
    MarkedPartitionPair len{{0, 3}, {0, 1, 2}, {false}};
    CHECK_THROWS_AS(induce_mapping(len), ContractError);

    // A one-to-many block is not admissible.
    GeneralizedMapping lop;
    lop.segs = {{0, 1, 0, 3, false}};
    CHECK_FALSE(check_admissible(lop));
}

TEST_CASE("ratio_within matches a floating reference away from the boundary") {
    std::mt19937_64 g(3);
    for (int t = 0; t < 2000; ++t) {
        const i64 lx = std::uniform_int_distribution<i64>(1, 10000)(g);
        const i64 ly = std::uniform_int_distribution<i64>(1, 40000)(g);
        const int j = std::uniform_int_distribution<int>(0, 3)(g);
        const int e = 10;
        const i64 R = 2;
        const double c = std::pow(2.0, -(j + e / 8.0));
        const double q = double(ly) / double(lx);
        const double lo = (1 - c) / R, hi = R * (1 + c);
        if (std::abs(q - lo) < 1e-9 || std::abs(q - hi) < 1e-9) continue;
        CHECK(ratio_within(ly, lx, R, j, e, true) == (q > lo && q < hi));
    }
    // Exact boundary: j = 0, e = 8 gives c = 1/2, so the interval is [1/4, 3] for R = 2.
    CHECK(ratio_within(3, 1, 2, 0, 8, false));
    CHECK_FALSE(ratio_within(3, 1, 2, 0, 8, true));
    CHECK(ratio_within(1, 4, 2, 0, 8, false));
    CHECK_FALSE(ratio_within(1, 4, 2, 0, 8, true));
}

TEST_CASE("psi is a continuous increasing bijection with exact inverse") {
    const Rational n(1000), np(1500), M(100);
    for (i64 s : {0, 1, 37, 99}) {
        const auto pm = build_psi(n, np, Rational(s), M);
        CHECK(psi_eval(pm, Rational(0)) == 0);
        CHECK(psi_eval(pm, n) == np);
        CHECK(psi_eval(pm, M) == M + s);
        CHECK(psi_eval(pm, n - M) == np - M + s);
        Rational prev = -1;
        for (i64 x = 0; x <= 1000; x += 7) {
            const Rational y = psi_eval(pm, Rational(x));
            CHECK(y > prev);
            prev = y;
            CHECK(psi_inv(pm, y) == x);
        }
    }
    CHECK_THROWS_AS(build_psi(n, np, Rational(100), M), ContractError);
    CHECK_THROWS_AS(build_psi(Rational(150), np, Rational(0), M), ContractError);
}

TEST_CASE("separating shift satisfies both distance conditions") {
    const auto ps = profile("meso");
    const i64 L3 = P48, D = i64(1) << 37, n = P52, np = 3 * (i64(1) << 51);
    std::mt19937_64 g(11);
    for (int t = 0; t < 20; ++t) {
        auto B = random_bad(g, n, L3, 6);
        std::vector<i64> Bp = random_bad(g, np, L3, 4);
        // Force two collisions at shift zero.
        const auto pm0 = build_psi(Rational(n), Rational(np), Rational(0), Rational(L3 / 2));
        Bp.push_back(to_i64(numerator(psi_eval(pm0, Rational(B[1]))) / denominator(psi_eval(pm0, Rational(B[1]))), "y"));
        Bp.push_back(to_i64(numerator(psi_eval(pm0, Rational(B[4]))) / denominator(psi_eval(pm0, Rational(B[4]))), "y") + 1000);
        Bp = sorted(Bp);
        const auto s = find_separating_shift(n, np, B, Bp, 1, ps);
        REQUIRE(s);
        CHECK(*s > 0);
        CHECK(*s <= (i64(1) << 40));
        const auto pm = build_psi(Rational(n), Rational(np), Rational(*s), Rational(L3 / 2));
        for (i64 i : B)
            for (i64 ip : Bp) {
                CHECK(abs(psi_eval(pm, Rational(i)) - ip) >= D);
                CHECK(abs(Rational(i) - psi_inv(pm, Rational(ip))) >= D);
            }
        // Minimality: the shift just below fails one of the conditions.
        const auto pmm = build_psi(Rational(n), Rational(np), Rational(*s - 1), Rational(L3 / 2));
        bool fails = false;
        for (i64 i : B)
            for (i64 ip : Bp)
                if (abs(psi_eval(pmm, Rational(i)) - ip) < D || abs(Rational(i) - psi_inv(pmm, Rational(ip))) < D)
                    fails = true;
        CHECK(fails);
    }
    CHECK(find_separating_shift(n, np, {}, {P48 + 5}, 1, ps) == 0);
    CHECK_THROWS_AS(find_separating_shift(n, np, {10}, {}, 1, ps), ContractError);
}

TEST_CASE("G family on meso level 1") {
    const auto ps = profile("meso");
    const i64 n = P52, np = 3 * (i64(1) << 51);
    std::mt19937_64 g(5);
    for (int t = 0; t < 6; ++t) {
        auto B = random_bad(g, n, P48, 6);
        auto Bp = random_bad(g, np, P48, 3);
        // A tight X cluster and a Y bad sitting on the image of an X bad.
        B.push_back(B[2] + 1000);
        B.push_back(B[2] + 5000);
        const auto pm0 = build_psi(Rational(n), Rational(np), Rational(0), Rational(P48 / 2));
        const Rational y = psi_eval(pm0, Rational(B[5]));
        Bp.push_back(to_i64(numerator(y) / denominator(y), "y"));
        B = sorted(B);
        Bp = sorted(Bp);
        const auto f = build_G_family(n, np, B, Bp, 1, ps);
        CHECK(f.base.marked.front() == false);
        CHECK(f.base.marked.back() == false);
        check_family(f, B, Bp, 1, ps, false);
    }
    // Many Y clusters between two X bads: the copied cluster lengths drift the X partner past the
    // separating gap at this scale, reported as an invariant failure.
    {
        const auto pm0 = build_psi(Rational(n), Rational(np), Rational(0), Rational(P48 / 2));
        std::vector<i64> B{P52 / 4, P52 / 2};
        std::vector<i64> Bp;
        const i64 y0 = ifloor_test(psi_eval(pm0, Rational(P52 / 4)));
        for (int k = 1; k <= 6; ++k) Bp.push_back(y0 + k * (i64(1) << 37));
        Bp.push_back(ifloor_test(psi_eval(pm0, Rational(P52 / 2))) - (i64(1) << 38));
        CHECK_THROWS_AS(build_G_family(n, np, B, Bp, 1, ps), InvariantError);
    }
    // Ratio n'/n = 3 is outside the 7/4 bound for R = 2 at level 1.
    CHECK_THROWS_AS(build_G_family(P52 / 3, P52, {}, {}, 1, ps), ContractError);
    // n below L^(alpha - 1).
    CHECK_THROWS_AS(build_G_family(1000, 1000, {}, {}, 1, ps), ContractError);
}

TEST_CASE("G family with empty bad sets is one block") {
    const auto ps = profile("meso");
    const auto f = build_G_family(P52, P52 + 12345, {}, {}, 1, ps);
    CHECK(f.base.P == Partition{0, P52});
    CHECK(f.base.Pp == Partition{0, P52 + 12345});
    CHECK(f.shiftTo < f.shiftFrom);
    CHECK(check_class_G(f.member(f.count), {}, {}, 1, ps));
}

TEST_CASE("H1 family on meso level 1") {
    const auto ps = profile("meso");
    const i64 n = P52, np = 3 * (i64(1) << 50);
    std::mt19937_64 g(9);
    for (int t = 0; t < 6; ++t) {
        const auto B = random_bad(g, n, P48, 2);
        const auto f = build_H1_family(n, np, B, 1, ps);
        CHECK(f.base.P[1] == P48 / 2);
        CHECK(f.base.Pp[1] == P48);
        CHECK(f.base.P[f.base.P.size() - 2] == n - P48 / 2);
        CHECK(f.base.Pp[f.base.Pp.size() - 2] == np - P48);
        check_family(f, B, {}, 1, ps, true);
    }
    CHECK_THROWS_AS(build_H1_family(n, np, {P48 + 1, P48 + 2, P48 + 3}, 1, ps), ContractError);
    CHECK_THROWS_AS(build_H1_family(n, np, {100}, 1, ps), ContractError);
}

TEST_CASE("H2 mapping on nano level 1") {
    const auto ps = profile("nano");
    for (i64 n : {2000, 2005, 1700}) {
        for (i64 np : {1500, 2000, 2600}) {
            if (Rational(np, n) < Rational(3, 4) || Rational(np, n) > Rational(4, 3)) continue;
            for (const std::vector<i64>& B : {std::vector<i64>{}, std::vector<i64>{600}, std::vector<i64>{700, 900}}) {
                if (i64(B.size()) * 400 > n - 1024) continue;
                CAPTURE(n);
                CAPTURE(np);
                const auto h = build_H2(n, np, B, 1, ps);
                CHECK(h.gm.tags.count("admissible"));
                CHECK(h.gm.tags.count("H2"));
                CHECK(h.k == (n - 1024) / 16);
                CHECK(h.r == (n - 1024) % 16);
                CHECK(h.s >= 6);
                CHECK(h.s <= 39);
                CHECK(h.gm.xhi() == n);
                CHECK(h.gm.yhi() == np);
                CHECK(h.mpp.marked.front());
                CHECK(h.mpp.marked.back());
                for (i64 b : B) CHECK(h.gm.x_singleton(b));
            }
        }
    }
    // Too many bad positions: (2000 - 1024) / 400 < 3.
    CHECK_THROWS_AS(build_H2(2000, 2000, {600, 700, 800}, 1, ps), ContractError);
    CHECK_THROWS_AS(build_H2(2000, 3000, {}, 1, ps), ContractError);
    CHECK_THROWS_AS(build_H2(2000, 2000, {100}, 1, ps), ContractError);
}

TEST_CASE("H2 step outside the range raises an invariant error") {
    const auto ps = profile("nano");
    // n - 2L^3 = 16 with r = 0 leaves one interior block; the bad bound 16/400 admits no bad position.
    CHECK_THROWS_AS(build_H2(1040, 1040, {520}, 1, ps), ContractError);
    // Without bads the single block must absorb n' - 2L^3 = 60 > R^+ - 1.
    CHECK_THROWS_AS(build_H2(1040, 1084, {}, 1, ps), InvariantError);
}

TEST_CASE("compress schedule at micro level 1: valid steps, proof bound can fail") {
    const auto ps = profile("micro");
    const auto sc = scales(ps, 1);
    const i64 Rj = to_i64(sc.Rj, "Rj"), Rm = to_i64(sc.Rminus, "Rm"), Rp = to_i64(sc.Rplus, "Rp");
    CHECK(Rj == 8);
    CHECK(Rm == 6);
    CHECK(Rp == 10);
    int valid = 0, proofFail = 0;
    for (i64 n = 65; n <= 300; ++n) {
        for (i64 np = n / 2; np <= 2 * n; ++np) {
            CompressSchedule cs;
            try {
                cs = compress_embed_schedule(n, np, 1, ps);
            } catch (const ContractError&) {
                CHECK_FALSE(ratio_within(np, n, ps.R, 1, 10, false));
                continue;
            }
            ++valid;
            if (!cs.proofBound) ++proofFail;
            const auto pr = cs.pairs();
            i64 x = 0, y = 0;
            for (std::size_t k = 0; k < pr.size(); ++k) {
                const auto& [xr, yr] = pr[k];
                CHECK(xr.first == x);
                CHECK(yr.first == y);
                const i64 dx = xr.second - xr.first, dy = yr.second - yr.first;
                if (k < std::size_t(cs.k)) {
                    CHECK(dx == Rj);
                    CHECK(dy >= Rm);
                    CHECK(dy <= Rp);
                } else {
                    CHECK(dx == cs.r);
                    CHECK(dy == cs.r);
                }
                x = xr.second;
                y = yr.second;
            }
            CHECK(x == n);
            CHECK(y == np);
        }
    }
    CHECK(valid > 1000);
    CHECK(proofFail > 0);
}

TEST_CASE("compress schedule at micro level 3 always meets the proof bound") {
    const auto ps = profile("micro");
    const auto sc = scales(ps, 3);
    const i64 L = to_i64(sc.L, "L");
    std::mt19937_64 g(21);
    int checked = 0;
    for (int t = 0; t < 3000; ++t) {
        const i64 n = std::uniform_int_distribution<i64>(L + 1, 4 * L)(g);
        const i64 np = std::uniform_int_distribution<i64>(n - n / 16, n + n / 16)(g);
        if (!ratio_within(np, n, ps.R, 3, 10, false)) continue;
        const auto cs = compress_embed_schedule(n, np, 3, ps);
        CHECK(cs.proofBound);
        ++checked;
    }
    CHECK(checked > 500);
}

TEST_CASE("compress schedule direct case") {
    const auto ps = profile("micro");
    const auto cs = compress_embed_schedule(8, 10, 1, ps);
    CHECK(cs.direct);
    CHECK_FALSE(cs.proofBound);
    REQUIRE(cs.pairs().size() == 1);
    CHECK(cs.pairs()[0].second.second == 10);
    CHECK_THROWS_AS(compress_embed_schedule(8, 11, 1, ps), ContractError);
}

TEST_CASE("apply_mapping_embed yields witnesses accepted by the level-1 verifier") {
    const auto ps = profile("nano");
    const auto c1 = step_constants(scales(ps, 1));
    auto oracles = [](std::set<i64> badPairsX) {
        EmbedOracles o;
        o.pairEmbed = [badPairsX](i64 x, i64) { return !badPairsX.count(x); };
        o.goodX = [](i64) { return true; };
        o.goodY = [](i64) { return true; };
        return o;
    };
    for (i64 np : {1600, 2000, 2600}) {
        const std::vector<i64> B{700};
        const auto h = build_H2(2005, np, B, 1, ps);
        auto o = oracles({});
        const auto w = apply_mapping_embed(h.gm, o, 1, ps);
        REQUIRE(w);
        o.c = c1;
        CHECK(rembed_verify(2005, np, *w, o));
        // A marked position that fails the pair oracle blocks this mapping.
        CHECK_FALSE(apply_mapping_embed(h.gm, oracles({699}), 1, ps));
    }

    // A hand-built G-tagged mapping whose middle block needs the compression schedule.
    GeneralizedMapping gm;
    gm.segs = {{0, 20, 0, 20, true}, {20, 120, 20, 140, false}, {120, 125, 140, 145, true}};
    gm.tags = {"admissible", "G"};
    auto o = oracles({});
    const auto w = apply_mapping_embed(gm, o, 1, ps);
    REQUIRE(w);
    o.c = c1;
    CHECK(rembed_verify(125, 145, *w, o));
    // A bad Y position inside the compressed block rejects it.
    auto o2 = oracles({});
    o2.goodY = [](i64 y) { return y != 60; };
    CHECK_FALSE(apply_mapping_embed(gm, o2, 1, ps));

    gm.tags = {"admissible"};
    CHECK_THROWS_AS(apply_mapping_embed(gm, o, 1, ps), ContractError);
}

TEST_CASE("lengths above L^(alpha-1) but below L^3 are reported as scale failures") {
    const auto micro = profile("micro");
    // L_1 = 64: L^(alpha-1) = 4096 < n < L^3 = 262144.
    CHECK_THROWS_AS(build_G_family(5000, 5000, {}, {}, 1, micro), InvariantError);
    const auto nano = profile("nano");
    // L_1 = 8: n - 2L^3 = 10 < R_1 = 16.
    CHECK_THROWS_AS(build_H2(1034, 1034, {}, 1, nano), InvariantError);
}

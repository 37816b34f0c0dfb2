#include "doctest.h"
#include "mse/rembed.hpp"

using namespace mse;

namespace {

ProblemSpec lipschitz_like() {
    ProblemSpec s;
    s.name = "lipschitz-like";
    s.alphabetX = {"0", "1"};
    s.alphabetY = {"Z", "O", "S"};
    s.muX = {Rational(1, 2), Rational(1, 2)};
    s.muY = {Rational(1, 4), Rational(1, 4), Rational(1, 2)};
    s.relation = {{0, 0}, {0, 2}, {1, 1}, {1, 2}};
    s.goodX = {true, true};
    s.goodY = {false, false, true};
    return s;
}

SymbolSeq random_seq(Rng& r, int len, int k) {
    SymbolSeq s(len);
    for (auto& v : s) v = static_cast<int>(r.uniform_int(0, k - 1));
    return s;
}

}  // namespace

TEST_CASE("single paired step") {
    auto spec = compatible_spec(Rational(1, 2));
    auto w = rembed_decide(SymbolSeq{1}, SymbolSeq{0}, spec, step_constants(1));
    REQUIRE(w);
    CHECK(w->iSeq == std::vector<i64>{0, 1});
    CHECK(w->iPrimeSeq == std::vector<i64>{0, 1});
}

TEST_CASE("one against one has no witness") {
    auto spec = compatible_spec(Rational(1, 2));
    CHECK_FALSE(rembed_decide(SymbolSeq{1}, SymbolSeq{1}, spec, step_constants(1)));
}

TEST_CASE("all-good pair of lengths two and three") {
    auto spec = compatible_spec(Rational(1, 2));
    SymbolSeq X{0, 0}, Y{0, 0, 0};
    auto o = symbol_oracles(spec, X, Y, step_constants(1));
    auto w = rembed_decide(2, 3, o);
    REQUIRE(w);
    CHECK(rembed_verify(2, 3, *w, o));
    // Lexicographic choice: a paired step, then a Y-jump of X-length 1.
    CHECK(w->iSeq == std::vector<i64>{0, 1, 2});
    CHECK(w->iPrimeSeq == std::vector<i64>{0, 1, 3});
    // The single-jump witness is valid too.
    CHECK(rembed_verify(2, 3, EmbedWitness{{0, 2}, {0, 3}}, o));
}

TEST_CASE("verify rejects malformed witnesses") {
    auto spec = compatible_spec(Rational(1, 2));
    SymbolSeq X{0, 0, 0}, Y{0, 0, 0};
    auto o = symbol_oracles(spec, X, Y, step_constants(1));
    CHECK_FALSE(rembed_verify(3, 3, EmbedWitness{{0, 3}, {0, 3}}, o));  // jump R0+1 on both sides
    SymbolSeq X1{1}, Y1{1};
    auto o1 = symbol_oracles(spec, X1, Y1, step_constants(1));
    CHECK_FALSE(rembed_verify(1, 1, EmbedWitness{{0, 1}, {0, 1}}, o1));  // unrelated pair
    CHECK_FALSE(rembed_verify(3, 3, EmbedWitness{{0, 1}, {0, 1}}, o));   // does not end at (n,n')
    CHECK_FALSE(rembed_verify(3, 3, EmbedWitness{{0}, {0, 1}}, o));
}

TEST_CASE("jump over a bad symbol is rejected") {
    auto spec = compatible_spec(Rational(1, 2));
    SymbolSeq X{0, 1}, Y{0, 0, 0};
    auto o = symbol_oracles(spec, X, Y, step_constants(1));
    CHECK_FALSE(rembed_verify(2, 3, EmbedWitness{{0, 2}, {0, 3}}, o));
}

TEST_CASE("decide agrees with brute force and verify") {
    auto compat = compatible_spec(Rational(1, 2));
    auto lip = lipschitz_like();
    auto r = rng_stream(11, 0);
    int yes = 0;
    for (int it = 0; it < 400; ++it) {
        const bool useLip = it % 2;
        const auto& spec = useLip ? lip : compat;
        SymbolSeq X = random_seq(r, int(r.uniform_int(0, 8)), int(spec.size(Side::X)));
        SymbolSeq Y = random_seq(r, int(r.uniform_int(0, 8)), int(spec.size(Side::Y)));
        auto o = symbol_oracles(spec, X, Y, step_constants(1));
        auto w = rembed_decide(i64(X.size()), i64(Y.size()), o);
        CHECK(bool(w) == rembed_bruteforce(i64(X.size()), i64(Y.size()), o));
        if (w) {
            ++yes;
            CHECK(rembed_verify(i64(X.size()), i64(Y.size()), *w, o));
        }
    }
    CHECK(yes > 20);
}

TEST_CASE("enlarging the relation never loses a yes") {
    auto spec = compatible_spec(Rational(1, 2));
    auto big = spec;
    big.relation.insert({1, 1});
    auto r = rng_stream(12, 0);
    for (int it = 0; it < 200; ++it) {
        SymbolSeq X = random_seq(r, int(r.uniform_int(0, 7)), 2);
        SymbolSeq Y = random_seq(r, int(r.uniform_int(0, 7)), 2);
        if (rembed_decide(X, Y, spec, step_constants(1))) CHECK(rembed_decide(X, Y, big, step_constants(1)));
    }
}

TEST_CASE("good segments compress and expand at level zero") {
    auto spec = compatible_spec(Rational(1, 2));
    for (i64 R = 1; R <= 2; ++R) {
        auto c = step_constants(R);
        for (i64 t = c.R0minus; t <= c.R0plus; ++t) {
            SymbolSeq A(c.R0, 0), B(t, 0);
            CHECK(rembed_decide(A, B, spec, c));
            CHECK(rembed_decide(B, A, spec, c));
        }
    }
}

TEST_CASE("work cap and brute-force cap") {
    EmbedOracles o;
    o.pairEmbed = [](i64, i64) { return true; };
    o.goodX = o.goodY = [](i64) { return true; };
    o.c = step_constants(1);
    CHECK_THROWS_AS(rembed_decide(1000, 1000, o, 1e6), ResourceError);
    CHECK_THROWS_AS(rembed_bruteforce(13, 2, o), ResourceError);
    CHECK(rembed_decide(0, 0, o));
    CHECK_FALSE(rembed_decide(0, 1, o));
}

TEST_CASE("step kinds") {
    auto c = step_constants(1);
    CHECK(step_kind(1, 1, c) == StepKind::Paired);
    CHECK(step_kind(2, 3, c) == StepKind::XJump);
    CHECK(step_kind(3, 2, c) == StepKind::YJump);
    CHECK(step_kind(3, 3, c) == StepKind::Invalid);
    CHECK(step_kind(2, 4, c) == StepKind::Invalid);
}

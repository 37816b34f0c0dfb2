#include "mse/core.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mse {

ParseError::ParseError(const std::string& what, int line_, int column_)
    : std::runtime_error(what + " (line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ")"),
      line(line_),
      column(column_) {}

const char* side_name(Side s) { return s == Side::X ? "X" : "Y"; }

// ---------------------------------------------------------------- parameters

ValidationReport validate_parameters(const ParameterSet& ps) {
    using I = __int128;
    ValidationReport rep;
    auto add = [&](std::string name, bool pass, std::string detail) {
        rep.checks.push_back({std::move(name), pass, std::move(detail)});
    };
    const I a = ps.alpha, b = ps.beta, d = ps.delta, m = ps.m, k0 = ps.k0, R = ps.R;
    auto s = [](I v) { return std::to_string(static_cast<long long>(v)); };
    add("alpha>9", a > 9, s(a) + " vs 9");
    const I dmin = std::max<I>(2 * a, 48);
    add("delta>max(2alpha,48)", d > dmin, s(d) + " vs " + s(dmin));
    add("beta>alpha(delta+1)", b > a * (d + 1), s(b) + " vs " + s(a * (d + 1)));
    add("m>9alpha*beta", m > 9 * a * b, s(m) + " vs " + s(9 * a * b));
    add("k0>36alpha*beta", k0 > 36 * a * b, s(k0) + " vs " + s(36 * a * b));
    add("R>6(m+1)", R > 6 * (m + 1), s(R) + " vs " + s(6 * (m + 1)));
    rep.conforming = std::all_of(rep.checks.begin(), rep.checks.end(),
                                 [](const ConstraintCheck& c) { return c.pass; });
    rep.usable = ps.alpha >= 2 && ps.beta > 0 && ps.delta > 0 && ps.m > 0 && ps.k0 > 0 &&
                 ps.R > 0 && ps.L0 > 0;
    return rep;
}

ParameterSet profile(const std::string& name) {
    ParameterSet ps;
    ps.name = name;
    if (name == "paper") {
        ps.alpha = 10; ps.delta = 50; ps.beta = 600; ps.m = 60000; ps.k0 = 300000; ps.R = 400000;
        ps.L0 = 1000000;
    } else if (name == "micro") {
        ps.alpha = 3; ps.delta = 4; ps.beta = 2; ps.m = 4; ps.k0 = 2; ps.R = 1; ps.L0 = 4;
    } else if (name == "nano") {
        ps.alpha = 3; ps.delta = 4; ps.beta = 2; ps.m = 4; ps.k0 = 2; ps.R = 2; ps.L0 = 2;
    } else if (name == "meso") {
        ps.alpha = 2; ps.delta = 4; ps.beta = 2; ps.m = 4; ps.k0 = 2; ps.R = 2; ps.L0 = 256;
    } else {
        throw ContractError("unknown profile '" + name + "'");
    }
    return ps;
}

std::vector<std::string> profile_names() { return {"paper", "micro", "nano", "meso"}; }

// ---------------------------------------------------------------- scales

BigInt pow_int(const BigInt& base, unsigned long e) {
    BigInt r;
    mpz_pow_ui(r.backend().data(), base.backend().data(), e);
    return r;
}

BigInt floor_pow(const BigInt& x, unsigned num, unsigned den) {
    if (x < 0) throw ContractError("floor_pow of a negative number");
    if (den == 0) throw ContractError("floor_pow with zero denominator");
    BigInt p = pow_int(x, num);
    BigInt r;
    mpz_root(r.backend().data(), p.backend().data(), den);
    return r;
}

i64 to_i64(const BigInt& v, const char* what) {
    if (v > std::numeric_limits<i64>::max() || v < std::numeric_limits<i64>::min())
        throw ResourceError(std::string(what) + " does not fit in 64 bits");
    return v.convert_to<i64>();
}

ScaleRecord scales(const ParameterSet& ps, int j, std::size_t maxBits) {
    if (j < 0) throw ContractError("scales: level must be nonnegative");
    if (ps.L0 < 1 || ps.alpha < 2) throw ContractError("scales: parameter set not usable");
    const BigInt expo = pow_int(BigInt(ps.alpha), static_cast<unsigned long>(j));
    const std::size_t bitsL0 = mpz_sizeinbase(BigInt(ps.L0).backend().data(), 2);
    // The floors need L^17; budget the largest intermediate.
    if (ps.L0 > 1 && BigInt(expo) * bitsL0 * 17 > BigInt(maxBits))
        throw ResourceError("scales: L_" + std::to_string(j) + " exceeds the big-integer budget of " +
                            std::to_string(maxBits) + " bits");
    ScaleRecord s;
    s.j = j;
    s.L = pow_int(BigInt(ps.L0), expo.convert_to<unsigned long>());
    const BigInt two_j = pow_int(BigInt(2), j);
    const BigInt two_2j1 = pow_int(BigInt(2), 2 * j + 1);
    s.Rj = pow_int(BigInt(4), j) * 2 * ps.R;
    s.Rminus = two_2j1 - two_j;
    s.Rplus = BigInt(ps.R) * ps.R * (two_2j1 + two_j);
    s.mj = Rational(ps.m) + Rational(BigInt(1), two_j);
    s.fl32 = floor_pow(s.L, 3, 2);
    s.fl52 = floor_pow(s.L, 5, 2);
    s.fl178 = floor_pow(s.L, 17, 8);
    s.fl94 = floor_pow(s.L, 9, 4);
    s.fl54 = floor_pow(s.L, 5, 4);
    return s;
}

// ---------------------------------------------------------------- randomness

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

bool Rng::bernoulli(double p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    return uniform() < p;
}

i64 Rng::geometric(double p) {
    if (p >= 1) return 0;
    if (p <= 0) throw ContractError("geometric: success probability must be positive");
    const double u = 1.0 - uniform();  // (0,1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (k >= static_cast<double>(std::numeric_limits<i64>::max() / 2))
        return std::numeric_limits<i64>::max() / 2;
    return static_cast<i64>(k);
}

i64 Rng::uniform_int(i64 lo, i64 hi) {
    if (hi < lo) throw ContractError("uniform_int: empty range");
    const u64 range = static_cast<u64>(hi) - static_cast<u64>(lo) + 1;
    if (range == 0) return static_cast<i64>(next());
    const u64 limit = std::numeric_limits<u64>::max() - std::numeric_limits<u64>::max() % range;
    u64 x;
    do {
        x = next();
    } while (x >= limit);
    return lo + static_cast<i64>(x % range);
}

Rng rng_stream(u64 master_seed, u64 stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                      0x6d736531u};
    return Rng(seq);
}

u64 stream_key(std::initializer_list<u64> parts) {
    u64 h = 0x9E3779B97F4A7C15ull;
    for (u64 p : parts) {
        u64 z = h ^ (p + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        h = z ^ (z >> 31);
    }
    return h;
}

// ---------------------------------------------------------------- problem specs

Rational ProblemSpec::tail(Side s) const {
    Rational sum = 0;
    for (const auto& p : mu(s)) sum += p;
    return Rational(1) - sum;
}

bool ProblemSpec::related(int x, int y) const {
    if (gapM0) return x >= 0 && y >= 0 && std::abs(x - y) <= *gapM0;
    return relation.count({x, y}) > 0;
}

bool ProblemSpec::good(Side s, int sym) const {
    if (sym < 0) return false;
    if (gapM0) return sym <= *gapM0;
    const auto& g = s == Side::X ? goodX : goodY;
    return static_cast<std::size_t>(sym) < g.size() && g[sym];
}

int ProblemSpec::symbol_index(Side s, const std::string& token) const {
    const auto& a = alphabet(s);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] == token) return static_cast<int>(i);
    std::string t = token;
    if (gapM0 && !t.empty() && (t[0] == 'C' || t[0] == 'c')) t = t.substr(1);
    if (!t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        t.size() < 9) {
        const int k = std::stoi(t);
        if (gapM0 || static_cast<std::size_t>(k) < a.size()) return k;
    }
    return -1;
}

void check_spec(const ProblemSpec& spec) {
    for (Side s : {Side::X, Side::Y}) {
        const auto& mu = spec.mu(s);
        if (mu.size() != spec.size(s))
            throw ContractError(std::string("spec: mu table size mismatch on side ") + side_name(s));
        const auto& g = s == Side::X ? spec.goodX : spec.goodY;
        if (g.size() != spec.size(s))
            throw ContractError(std::string("spec: good table size mismatch on side ") + side_name(s));
        for (const auto& p : mu)
            if (p < 0) throw ContractError(std::string("spec: negative probability on side ") + side_name(s));
        if (spec.tail(s) < 0)
            throw ContractError(std::string("spec: probabilities exceed 1 on side ") + side_name(s));
    }
    for (const auto& [x, y] : spec.relation)
        if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= spec.size(Side::X) ||
            static_cast<std::size_t>(y) >= spec.size(Side::Y))
            throw ContractError("spec: relation refers to an unknown symbol");
    for (std::size_t x = 0; x < spec.size(Side::X); ++x)
        for (std::size_t y = 0; y < spec.size(Side::Y); ++y)
            if (spec.good(Side::X, int(x)) && spec.good(Side::Y, int(y)) && !spec.related(int(x), int(y)))
                throw ContractError("spec: good pair (" + spec.alphabetX[x] + "," + spec.alphabetY[y] +
                                    ") missing from the relation");
}

bool tail_condition_holds(const ProblemSpec& spec, Side side, i64 L0) {
    const auto& mu = spec.mu(side);
    const i64 n = static_cast<i64>(mu.size());
    const i64 kmax = std::max<i64>(n, L0) + 64;
    // suffix[k] = tabulated mass at 1-based positions > k
    std::vector<Rational> suffix(n + 1, Rational(0));
    for (i64 k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + mu[k];
    const Rational rest = spec.tail(side);
    for (i64 k = std::max<i64>(L0, 1); k <= kmax; ++k) {
        Rational beyond;
        if (spec.gapM0) {
            // positions > k are C_k, C_{k+1}, ...: mass (1/2)^(2^(k-1))
            if (k - 1 > 20) break;  // below any representable 1/k threshold
            beyond = Rational(BigInt(1), pow_int(BigInt(2), 1ul << (k - 1)));
        } else {
            beyond = (k < n ? suffix[k] : Rational(0)) + rest;
        }
        if (beyond * k > 1) return false;
    }
    return true;
}

ProblemSpec compatible_spec(const Rational& q) {
    if (q < 0 || q > 1) throw ContractError("compatible_spec: q must lie in [0,1]");
    ProblemSpec s;
    s.name = "compatible(q=" + to_string(q) + ")";
    s.alphabetX = s.alphabetY = {"0", "1"};
    s.muX = s.muY = {Rational(1) - q, q};
    s.relation = {{0, 0}, {0, 1}, {1, 0}};
    s.goodX = s.goodY = {true, false};
    return s;
}

// ---------------------------------------------------------------- rationals

namespace {

// Base-10 only; the string constructor would read a leading 0 as octal.
BigInt decimal_bigint(const std::string& s, const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    if (i == s.size()) throw ContractError("malformed rational literal: " + text);
    for (std::size_t k = i; k < s.size(); ++k)
        if (s[k] < '0' || s[k] > '9') throw ContractError("malformed rational literal: " + text);
    while (i + 1 < s.size() && s[i] == '0') ++i;
    BigInt v(s.substr(i));
    return neg ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ContractError("empty rational literal");
    const auto slash = t.find('/');
    try {
        if (slash != std::string::npos) {
            const BigInt num = decimal_bigint(t.substr(0, slash), text), den = decimal_bigint(t.substr(slash + 1), text);
            if (den == 0) throw ContractError("rational literal with zero denominator: " + text);
            return Rational(num, den);
        }
        bool neg = false;
        std::size_t i = 0;
        if (t[i] == '+' || t[i] == '-') neg = t[i++] == '-';
        std::string digits;
        long exp10 = 0;
        bool seenDot = false, any = false;
        for (; i < t.size(); ++i) {
            const char c = t[i];
            if (c >= '0' && c <= '9') {
                digits += c;
                any = true;
                if (seenDot) --exp10;
            } else if (c == '.' && !seenDot) {
                seenDot = true;
            } else if (c == 'e' || c == 'E') {
                exp10 += std::stol(t.substr(i + 1));
                i = t.size();
                break;
            } else {
                throw ContractError("malformed rational literal: " + text);
            }
        }
        if (!any) throw ContractError("malformed rational literal: " + text);
        Rational r{decimal_bigint(digits, text)};
        if (exp10 > 0) r *= Rational(pow_int(BigInt(10), exp10));
        if (exp10 < 0) r /= Rational(pow_int(BigInt(10), -exp10));
        return neg ? Rational(-r) : r;
    } catch (const ContractError&) {
        throw;
    } catch (const std::exception&) {
        throw ContractError("malformed rational literal: " + text);
    }
}

std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational from_double(double d) { return Rational(d); }

}  // namespace mse

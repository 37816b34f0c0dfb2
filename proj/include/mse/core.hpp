#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mse {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using i64 = std::int64_t;
using u64 = std::uint64_t;

// Error taxonomy shared by every module.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line, int column);
    int line;
    int column;
};

enum class Side { X, Y };
inline Side other(Side s) { return s == Side::X ? Side::Y : Side::X; }
const char* side_name(Side s);

// ---------------------------------------------------------------- parameters

struct ParameterSet {
    std::string name = "custom";
    i64 alpha = 2;
    i64 beta = 1;
    i64 delta = 1;
    i64 m = 1;
    i64 k0 = 1;
    i64 R = 1;
    i64 L0 = 2;
};

struct ConstraintCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ConstraintCheck> checks;
    bool conforming = false;  // all constraints of the multi-scale argument hold
    bool usable = false;      // fields positive and alpha >= 2, so the machinery runs
};

ValidationReport validate_parameters(const ParameterSet& ps);

// Built-in profiles: "paper", "micro", "nano", "meso".
ParameterSet profile(const std::string& name);
std::vector<std::string> profile_names();

// ---------------------------------------------------------------- scales

struct ScaleRecord {
    int j = 0;
    BigInt L;        // L_j = L0^(alpha^j)
    BigInt Rj;       // 4^j * 2R
    BigInt Rminus;   // 2^(2j+1) - 2^j
    BigInt Rplus;    // R^2 (2^(2j+1) + 2^j)
    Rational mj;     // m + 2^-j
    BigInt fl32, fl52, fl178, fl94, fl54;
};

// floor(x^(num/den)) for x >= 0.
BigInt floor_pow(const BigInt& x, unsigned num, unsigned den);

// maxBits bounds the size of L_j; larger values raise ResourceError.
ScaleRecord scales(const ParameterSet& ps, int j, std::size_t maxBits = std::size_t(1) << 22);

i64 to_i64(const BigInt& v, const char* what);
BigInt pow_int(const BigInt& base, unsigned long e);

// ---------------------------------------------------------------- randomness

class Rng {
public:
    explicit Rng(std::seed_seq& seq) : eng_(seq) {}
    u64 next() { return eng_(); }
    double uniform();                      // [0,1)
    bool bernoulli(double p);
    i64 geometric(double p);               // support {0,1,...}, P(k)=p(1-p)^k
    i64 uniform_int(i64 lo, i64 hi);       // inclusive, unbiased
private:
    std::mt19937_64 eng_;
};

Rng rng_stream(u64 master_seed, u64 stream_id);
// Stable combination of identifiers into one stream id.
u64 stream_key(std::initializer_list<u64> parts);

// ---------------------------------------------------------------- problem specs

using SymbolSeq = std::vector<int>;

struct ProblemSpec {
    std::string name;
    std::vector<std::string> alphabetX, alphabetY;
    std::vector<Rational> muX, muY;
    std::set<std::pair<int, int>> relation;
    std::vector<bool> goodX, goodY;
    // Gap-class alphabets: symbol k means C_k, relation |k-k'| <= M0 and good k <= M0
    // also beyond the tabulated prefix.
    std::optional<int> gapM0;

    std::size_t size(Side s) const { return s == Side::X ? alphabetX.size() : alphabetY.size(); }
    const std::vector<Rational>& mu(Side s) const { return s == Side::X ? muX : muY; }
    const std::vector<std::string>& alphabet(Side s) const { return s == Side::X ? alphabetX : alphabetY; }
    Rational tail(Side s) const;  // 1 - tabulated mass
    bool related(int x, int y) const;
    bool good(Side s, int sym) const;
    int symbol_index(Side s, const std::string& token) const;  // -1 if unknown
};

// Throws ContractError when a ProblemSpec invariant fails.
void check_spec(const ProblemSpec& spec);

// Mass beyond position k (1-based) is at most 1/k for every k in [L0, alphabet size].
bool tail_condition_holds(const ProblemSpec& spec, Side side, i64 L0);

ProblemSpec compatible_spec(const Rational& q);

Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);
Rational from_double(double d);

}  // namespace mse

#include "mse/io.hpp"

#include "mse/encodings.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mse {

namespace {

// yaml-cpp marks are 0-based.
[[noreturn]] void fail_at(const YAML::Node& n, const std::string& what) {
    const auto m = n.Mark();
    throw ParseError(what, m.line + 1, m.column + 1);
}

YAML::Node load_yaml(const std::string& text) {
    try {
        YAML::Node root = YAML::Load(text);
        if (!root.IsMap()) throw ParseError("expected a mapping at the top level", 1, 1);
        return root;
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) fail_at(n, "'" + key + "' must be a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail_at(n, "'" + key + "' has the wrong type");
    }
}

Rational rational_at(const YAML::Node& n, const std::string& key) {
    const auto text = scalar<std::string>(n, key);
    try {
        return parse_rational(text);
    } catch (const std::exception& e) {
        fail_at(n, "'" + key + "': " + e.what());
    }
}

void reject_unknown(const YAML::Node& map, std::initializer_list<const char*> allowed) {
    for (const auto& kv : map) {
        const auto k = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) fail_at(kv.first, "unknown key '" + k + "'");
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json rational_json(const Rational& r) { return to_string(r); }

Rational rational_from_json(const Json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<i64>());
    throw ContractError("expected a rational string");
}

// Line and column of a byte offset.
std::pair<int, int> position(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Token with 1-based line/column of its first character.
struct Token {
    std::string text;
    int line, col;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            if (c == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
            continue;
        }
        Token t{"", line, col};
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != ',') {
            t.text += text[i++];
            ++col;
        }
        out.push_back(std::move(t));
    }
    return out;
}

bool all_bits(const std::string& s) {
    for (char c : s)
        if (c != '0' && c != '1') return false;
    return !s.empty();
}

}  // namespace

// ---------------------------------------------------------------- YAML inputs

ParameterSet parse_parameter_set(const std::string& yaml) {
    const YAML::Node root = load_yaml(yaml);
    reject_unknown(root, {"name", "base", "alpha", "beta", "delta", "m", "k0", "R", "L0"});
    ParameterSet ps;
    if (root["base"]) {
        const auto b = scalar<std::string>(root["base"], "base");
        try {
            ps = profile(b);
        } catch (const std::exception& e) {
            fail_at(root["base"], e.what());
        }
    }
    if (root["name"]) ps.name = scalar<std::string>(root["name"], "name");
    const std::pair<const char*, i64*> fields[] = {{"alpha", &ps.alpha}, {"beta", &ps.beta}, {"delta", &ps.delta},
                                                   {"m", &ps.m},         {"k0", &ps.k0},     {"R", &ps.R},
                                                   {"L0", &ps.L0}};
    for (const auto& [k, dst] : fields) {
        if (!root[k]) {
            if (!root["base"]) throw ParseError(std::string("missing key '") + k + "'", 1, 1);
            continue;
        }
        *dst = scalar<i64>(root[k], k);
        if (*dst <= 0) fail_at(root[k], std::string("'") + k + "' must be positive");
    }
    return ps;
}

std::string parameter_set_yaml(const ParameterSet& ps) {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << ps.name;
    out << YAML::Key << "alpha" << YAML::Value << ps.alpha << YAML::Key << "beta" << YAML::Value << ps.beta;
    out << YAML::Key << "delta" << YAML::Value << ps.delta << YAML::Key << "m" << YAML::Value << ps.m;
    out << YAML::Key << "k0" << YAML::Value << ps.k0 << YAML::Key << "R" << YAML::Value << ps.R;
    out << YAML::Key << "L0" << YAML::Value << ps.L0 << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

namespace {

void parse_side(const YAML::Node& n, const char* key, ProblemSpec& s, Side side) {
    if (!n.IsMap()) fail_at(n, std::string("'") + key + "' must be a mapping");
    reject_unknown(n, {"alphabet", "mu", "good"});
    for (const char* k : {"alphabet", "mu", "good"})
        if (!n[k]) fail_at(n, std::string("'") + key + "' lacks '" + k + "'");
    auto& alpha = side == Side::X ? s.alphabetX : s.alphabetY;
    auto& mu = side == Side::X ? s.muX : s.muY;
    auto& good = side == Side::X ? s.goodX : s.goodY;
    const YAML::Node a = n["alphabet"], m = n["mu"], g = n["good"];
    if (!a.IsSequence()) fail_at(a, "alphabet must be a list");
    for (const auto& t : a) {
        const auto name = scalar<std::string>(t, "alphabet");
        for (const auto& prev : alpha)
            if (prev == name) fail_at(t, "duplicate symbol '" + name + "'");
        alpha.push_back(name);
    }
    if (!m.IsSequence() || m.size() != a.size()) fail_at(m, "mu must list one probability per symbol");
    Rational total = 0;
    for (const auto& p : m) {
        mu.push_back(rational_at(p, "mu"));
        if (mu.back() < 0) fail_at(p, "negative probability");
        total += mu.back();
    }
    if (total > 1) fail_at(m, "probabilities sum above 1");
    if (!g.IsSequence()) fail_at(g, "good must be a list of symbols");
    good.assign(alpha.size(), false);
    for (const auto& t : g) {
        const auto name = scalar<std::string>(t, "good");
        const int k = s.symbol_index(side, name);
        if (k < 0) fail_at(t, "unknown symbol '" + name + "'");
        good[static_cast<std::size_t>(k)] = true;
    }
}

}  // namespace

ProblemSpec parse_problem_spec(const std::string& yaml) {
    const YAML::Node root = load_yaml(yaml);
    if (!root["kind"]) throw ParseError("missing key 'kind'", 1, 1);
    const auto kind = scalar<std::string>(root["kind"], "kind");
    ProblemSpec s;
    auto require = [&](const char* k) {
        if (!root[k]) fail_at(root, "kind '" + kind + "' needs '" + k + "'");
        return root[k];
    };
    if (kind == "compatible") {
        reject_unknown(root, {"kind", "name", "q"});
        const auto qn = require("q");
        const Rational q = rational_at(qn, "q");
        if (q < 0 || q > 1) fail_at(qn, "q must lie in [0, 1]");
        s = compatible_spec(q);
    } else if (kind == "lipschitz") {
        reject_unknown(root, {"kind", "name", "M0", "R"});
        const auto m0 = scalar<int>(require("M0"), "M0");
        const auto r = scalar<i64>(require("R"), "R");
        try {
            s = lipschitz_spec(m0, r);
        } catch (const std::exception& e) {
            fail_at(root, e.what());
        }
    } else if (kind == "roughiso") {
        reject_unknown(root, {"kind", "name", "M0", "K"});
        const auto m0 = scalar<int>(require("M0"), "M0");
        const int K = root["K"] ? scalar<int>(root["K"], "K") : -1;
        try {
            s = roughiso_spec(m0, K);
        } catch (const std::exception& e) {
            fail_at(root, e.what());
        }
    } else if (kind == "table") {
        reject_unknown(root, {"kind", "name", "x", "y", "relation"});
        s.name = "table";
        parse_side(require("x"), "x", s, Side::X);
        parse_side(require("y"), "y", s, Side::Y);
        const auto rel = require("relation");
        if (!rel.IsSequence()) fail_at(rel, "relation must be a list of [x, y] pairs");
        for (const auto& pr : rel) {
            if (!pr.IsSequence() || pr.size() != 2) fail_at(pr, "relation entries are [x, y] pairs");
            const auto xs = scalar<std::string>(pr[0], "relation"), ys = scalar<std::string>(pr[1], "relation");
            const int x = s.symbol_index(Side::X, xs), y = s.symbol_index(Side::Y, ys);
            if (x < 0) fail_at(pr[0], "unknown X symbol '" + xs + "'");
            if (y < 0) fail_at(pr[1], "unknown Y symbol '" + ys + "'");
            s.relation.insert({x, y});
        }
        try {
            check_spec(s);
        } catch (const ContractError& e) {
            fail_at(rel, e.what());
        }
    } else {
        fail_at(root["kind"], "unknown kind '" + kind + "'");
    }
    if (root["name"]) s.name = scalar<std::string>(root["name"], "name");
    return s;
}

std::string problem_spec_yaml(const ProblemSpec& spec) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    if (spec.gapM0) {
        out << YAML::Key << "kind" << YAML::Value << "roughiso";
        out << YAML::Key << "name" << YAML::Value << spec.name;
        out << YAML::Key << "M0" << YAML::Value << *spec.gapM0;
        out << YAML::Key << "K" << YAML::Value << static_cast<int>(spec.alphabetX.size()) - 1;
    } else {
        out << YAML::Key << "kind" << YAML::Value << "table";
        out << YAML::Key << "name" << YAML::Value << spec.name;
        for (Side side : {Side::X, Side::Y}) {
            out << YAML::Key << (side == Side::X ? "x" : "y") << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "alphabet" << YAML::Value << YAML::Flow << spec.alphabet(side);
            out << YAML::Key << "mu" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& p : spec.mu(side)) out << to_string(p);
            out << YAML::EndSeq;
            out << YAML::Key << "good" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (std::size_t k = 0; k < spec.size(side); ++k)
                if (spec.good(side, static_cast<int>(k))) out << spec.alphabet(side)[k];
            out << YAML::EndSeq << YAML::EndMap;
        }
        out << YAML::Key << "relation" << YAML::Value << YAML::BeginSeq;
        for (const auto& [x, y] : spec.relation)
            out << YAML::Flow << YAML::BeginSeq << spec.alphabetX[static_cast<std::size_t>(x)]
                << spec.alphabetY[static_cast<std::size_t>(y)] << YAML::EndSeq;
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- sequences

Bits parse_bits(const std::string& text) {
    const auto toks = tokenize(text);
    Bits out;
    if (toks.size() == 1 && all_bits(toks[0].text)) {
        for (char c : toks[0].text) out.push_back(c - '0');
        return out;
    }
    for (const auto& t : toks) {
        if (t.text != "0" && t.text != "1") throw ParseError("expected a bit, got '" + t.text + "'", t.line, t.col);
        out.push_back(t.text[0] - '0');
    }
    return out;
}

std::vector<i64> parse_ints(const std::string& text) {
    std::vector<i64> out;
    for (const auto& t : tokenize(text)) {
        std::size_t used = 0;
        i64 v = 0;
        try {
            v = std::stoll(t.text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.text.size()) throw ParseError("expected an integer, got '" + t.text + "'", t.line, t.col);
        out.push_back(v);
    }
    return out;
}

SymbolSeq parse_symbols(const std::string& text, const ProblemSpec& spec, Side side) {
    SymbolSeq out;
    auto toks = tokenize(text);
    // Unseparated 01 strings over a {0,1,...} alphabet.
    if (toks.size() == 1 && all_bits(toks[0].text) && toks[0].text.size() > 1 && spec.symbol_index(side, "0") >= 0 &&
        spec.symbol_index(side, "1") >= 0) {
        for (char c : toks[0].text) out.push_back(spec.symbol_index(side, std::string(1, c)));
        return out;
    }
    for (const auto& t : toks) {
        int k = spec.symbol_index(side, t.text);
        if (k < 0 && spec.gapM0) {
            std::string digits = t.text;
            if (!digits.empty() && digits[0] == 'C') digits.erase(0, 1);
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit) && digits.size() < 6)
                k = std::stoi(digits);
        }
        if (k < 0)
            throw ParseError("unknown " + std::string(side_name(side)) + " symbol '" + t.text + "'", t.line, t.col);
        out.push_back(k);
    }
    return out;
}

std::string format_symbols(const SymbolSeq& s, const ProblemSpec& spec, Side side) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        const auto k = static_cast<std::size_t>(s[i]);
        out += k < spec.size(side) ? spec.alphabet(side)[k] : "C" + std::to_string(k);
    }
    return out;
}

// ---------------------------------------------------------------- JSON

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = position(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(e.what(), line, col);
    }
}

Json to_json(const ParameterSet& ps) {
    return Json{{"name", ps.name}, {"alpha", ps.alpha}, {"beta", ps.beta}, {"delta", ps.delta},
                {"m", ps.m},       {"k0", ps.k0},       {"R", ps.R},       {"L0", ps.L0}};
}

Json to_json(const ProblemSpec& spec) {
    Json j;
    j["name"] = spec.name;
    if (spec.gapM0) {
        j["kind"] = "roughiso";
        j["M0"] = *spec.gapM0;
        j["K"] = static_cast<int>(spec.alphabetX.size()) - 1;
        return j;
    }
    j["kind"] = "table";
    for (Side side : {Side::X, Side::Y}) {
        Json s;
        s["alphabet"] = spec.alphabet(side);
        Json mu = Json::array(), good = Json::array();
        for (std::size_t k = 0; k < spec.size(side); ++k) {
            mu.push_back(rational_json(spec.mu(side)[k]));
            if (spec.good(side, static_cast<int>(k))) good.push_back(spec.alphabet(side)[k]);
        }
        s["mu"] = mu;
        s["good"] = good;
        j[side == Side::X ? "x" : "y"] = s;
    }
    Json rel = Json::array();
    for (const auto& [x, y] : spec.relation)
        rel.push_back(
            Json::array({spec.alphabetX[static_cast<std::size_t>(x)], spec.alphabetY[static_cast<std::size_t>(y)]}));
    j["relation"] = rel;
    return j;
}

Json to_json(const EmbedWitness& w) { return Json{{"i", w.iSeq}, {"i_prime", w.iPrimeSeq}}; }

EmbedWitness witness_from_json(const Json& j) {
    try {
        return {j.at("i").get<std::vector<i64>>(), j.at("i_prime").get<std::vector<i64>>()};
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("witness record: ") + e.what());
    }
}

Json to_json(const LipschitzMap& m) { return Json{{"phi", m.phi}, {"M", m.M}, {"first_max", m.firstMax}}; }

Json to_json(const DeletionSets& d) { return Json{{"D", d.D}, {"D_prime", d.Dprime}}; }

Json to_json(const RoughIsoMap& t) {
    Json a = Json::array();
    for (const auto& [x, y] : t.assignment) a.push_back(Json::array({x, y}));
    return Json{{"assignment", a}, {"M", to_string(t.M)}, {"D", to_string(t.D)}, {"C", to_string(t.C)}};
}

Json to_json(const BlockDistribution& d) {
    Json e = Json::array();
    for (const auto& w : d.entries) e.push_back(Json{{"chars", w.chars}, {"prob", rational_json(w.prob)}});
    return Json{{"schema", kSchemaVersion},
                {"level", d.level},
                {"side", side_name(d.side)},
                {"mass_deficit", rational_json(d.massDeficit)},
                {"max_length_enumerated", d.maxLengthEnumerated},
                {"entries", e}};
}

namespace {

Side side_from(const Json& j) {
    const auto s = j.get<std::string>();
    if (s == "X") return Side::X;
    if (s == "Y") return Side::Y;
    throw ContractError("side must be X or Y");
}

std::vector<WeightedBlock> blocks_from(const Json& a) {
    std::vector<WeightedBlock> out;
    for (const auto& e : a) out.push_back({e.at("chars").get<SymbolSeq>(), rational_from_json(e.at("prob"))});
    return out;
}

Json blocks_json(const std::vector<WeightedBlock>& v) {
    Json a = Json::array();
    for (const auto& w : v) a.push_back(Json{{"chars", w.chars}, {"prob", rational_json(w.prob)}});
    return a;
}

}  // namespace

BlockDistribution block_distribution_from_json(const Json& j) {
    try {
        BlockDistribution d;
        d.level = j.at("level").get<int>();
        d.side = side_from(j.at("side"));
        d.massDeficit = rational_from_json(j.at("mass_deficit"));
        d.maxLengthEnumerated = j.at("max_length_enumerated").get<i64>();
        d.entries = blocks_from(j.at("entries"));
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("block distribution record: ") + e.what());
    }
}

Json to_json(const CatalogCaps& c) {
    return Json{{"max_states", c.maxStates},
                {"semibad_max_bad", c.semibadMaxBad},
                {"partner_max_bad", c.partnerMaxBad},
                {"partner_max_length", c.partnerMaxLength},
                {"horizon_factor", c.horizonFactor},
                {"max_embed_checks", c.maxEmbedChecks},
                {"semibad", c.semibad},
                {"max_extension_tries", c.maxExtensionTries}};
}

Json to_json(const LevelCatalog& c) {
    Json j{{"schema", kSchemaVersion},
           {"level", c.level},
           {"side", side_name(c.side)},
           {"good_complete", c.goodComplete},
           {"semibad_complete", c.semibadComplete},
           {"unresolved", c.unresolved},
           {"truncated_at", c.truncatedAt ? Json(*c.truncatedAt) : Json(nullptr)},
           {"notes", c.notes},
           {"caps", to_json(c.caps)},
           {"good", blocks_json(c.good)},
           {"semibad", blocks_json(c.semibad)}};
    return j;
}

LevelCatalog level_catalog_from_json(const Json& j) {
    try {
        LevelCatalog c;
        c.level = j.at("level").get<int>();
        c.side = side_from(j.at("side"));
        c.goodComplete = j.at("good_complete").get<bool>();
        c.semibadComplete = j.at("semibad_complete").get<bool>();
        c.unresolved = j.at("unresolved").get<i64>();
        if (!j.at("truncated_at").is_null()) c.truncatedAt = j.at("truncated_at").get<int>();
        c.notes = j.at("notes").get<std::vector<std::string>>();
        const auto& k = j.at("caps");
        c.caps.maxStates = k.at("max_states").get<i64>();
        c.caps.semibadMaxBad = k.at("semibad_max_bad").get<int>();
        c.caps.partnerMaxBad = k.at("partner_max_bad").get<int>();
        c.caps.partnerMaxLength = k.at("partner_max_length").get<i64>();
        c.caps.horizonFactor = k.at("horizon_factor").get<i64>();
        c.caps.maxEmbedChecks = k.at("max_embed_checks").get<i64>();
        c.caps.semibad = k.at("semibad").get<bool>();
        c.caps.maxExtensionTries = k.at("max_extension_tries").get<i64>();
        c.good = blocks_from(j.at("good"));
        c.semibad = blocks_from(j.at("semibad"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("catalog record: ") + e.what());
    }
}

Json to_json(const BlockHierarchy& h) {
    Json levels = Json::array();
    for (const auto& lv : h.levels) {
        Json a = Json::array();
        for (const auto& b : lv)
            a.push_back(Json{{"start", b.start},
                             {"end", b.end()},
                             {"W", b.W ? Json(*b.W) : Json(nullptr)},
                             {"T", b.T ? Json(*b.T) : Json(nullptr)}});
        levels.push_back(a);
    }
    return Json{{"levels", levels}};
}

Json to_json(const GeneralizedMapping& gm) {
    Json segs = Json::array();
    for (const auto& s : gm.segs)
        segs.push_back(Json{{"x0", s.x0}, {"x1", s.x1}, {"y0", s.y0}, {"y1", s.y1}, {"singles", s.singles}});
    return Json{{"segments", segs}, {"tags", gm.tags}};
}

Json to_json(const MarkedPartitionPair& mpp, const std::set<std::string>& tags) {
    std::vector<i64> marked;
    for (std::size_t r = 0; r < mpp.marked.size(); ++r)
        if (mpp.marked[r]) marked.push_back(static_cast<i64>(r));
    return Json{{"P", mpp.P}, {"P_prime", mpp.Pp}, {"marked", marked}, {"tags", tags}};
}

Json mapping_diagram(const GeneralizedMapping& gm) {
    Json pts = Json::array();
    for (const auto& s : gm.segs) pts.push_back(Json::array({Json::array({s.x0, s.y0}), Json::array({s.x1, s.y1})}));
    return pts;
}

Json to_json(const CompressSchedule& s) {
    return Json{{"R_j", s.Rj},       {"k", s.k},           {"r", s.r},
                {"s", s.s},          {"plus_steps", s.plusSteps}, {"direct", s.direct},
                {"proof_bound", s.proofBound}};
}

Json to_json(const GoodReport& r) {
    return Json{{"good", r.good},
                {"bad_count", r.badCount},
                {"all_bad_semibad", r.allBadSemibad},
                {"windows_strong", r.windowsStrong},
                {"length_ok", r.lengthOk},
                {"failed", r.failed}};
}

Json to_json(const ProbInterval& p) {
    return Json{{"lo", to_string(p.lo)},   {"hi", to_string(p.hi)},           {"method", p.method},
                {"trials", p.trials},      {"successes", p.successes},        {"lo_float", to_double(p.lo)},
                {"hi_float", to_double(p.hi)}};
}

Json to_json(const ValidationReport& v) {
    Json checks = Json::array();
    for (const auto& c : v.checks) checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return Json{{"conforming", v.conforming}, {"usable", v.usable}, {"checks", checks}};
}

Json experiment_descriptor(const ExperimentResult& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    return Json{{"schema", kSchemaVersion}, {"name", r.name},   {"parameters", params},
                {"seed", r.seed},           {"trials", r.trials}, {"key_columns", r.keyColumns}};
}

Json to_json(const ExperimentResult& r) {
    Json j = experiment_descriptor(r);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json x{{"keys", row.keys},         {"estimate", row.estimate}, {"lo", row.lo},
               {"hi", row.hi},             {"successes", row.successes}, {"trials", row.trials},
               {"unknown", row.unknown}};
        x["reference"] = row.reference ? Json(*row.reference) : Json(nullptr);
        rows.push_back(x);
    }
    j["rows"] = rows;
    return j;
}

std::string experiment_csv(const ExperimentResult& r) {
    std::string out;
    for (const auto& k : r.keyColumns) out += k + ",";
    out += "estimate,lo,hi,successes,trials,unknown,reference\n";
    for (const auto& row : r.rows) {
        for (double k : row.keys) out += fmt_double(k) + ",";
        out += fmt_double(row.estimate) + "," + fmt_double(row.lo) + "," + fmt_double(row.hi) + ",";
        out += std::to_string(row.successes) + "," + std::to_string(row.trials) + "," + std::to_string(row.unknown) +
               ",";
        out += row.reference ? fmt_double(*row.reference) : "";
        out += "\n";
    }
    return out;
}

}  // namespace mse

#include "mse/construct.hpp"
#include "mse/deciders.hpp"
#include "mse/encodings.hpp"
#include "mse/experiments.hpp"
#include "mse/io.hpp"
#include "mse/partmaps.hpp"
#include "mse/store.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mse;
namespace fs = std::filesystem;

namespace {

enum Exit { kYes = 0, kNo = 1, kError = 2 };

struct Common {
    std::string format = "text";
    std::string out;
};

struct Model {
    std::string profileName = "micro";
    std::string paramsFile;
    std::string specFile;
    std::string q;
    std::string side = "X";
    std::string store;

    ParameterSet params() const {
        return paramsFile.empty() ? profile(profileName) : parse_parameter_set(read_text_file(paramsFile));
    }
    ProblemSpec spec() const {
        if (!specFile.empty()) return parse_problem_spec(read_text_file(specFile));
        if (!q.empty()) return compatible_spec(parse_rational(q));
        throw ContractError("give --spec FILE or --q RATIONAL");
    }
    Side sideValue() const {
        if (side == "X" || side == "x") return Side::X;
        if (side == "Y" || side == "y") return Side::Y;
        throw ContractError("--side must be X or Y");
    }
    // Store from --store, else the environment variable; none when neither is set.
    std::optional<Store> openStore() const {
        if (!store.empty()) return Store(store);
        const char* env = std::getenv(kStoreEnv);
        if (env && *env) return Store(env);
        return std::nullopt;
    }
};

// Inline value, or the contents of an existing file with that name.
std::string input_text(const std::string& v) {
    std::error_code ec;
    if (!v.empty() && fs::is_regular_file(v, ec)) return read_text_file(v);
    return v;
}

void write_output(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ContractError("cannot write '" + c.out + "'");
    f << text;
}

void emit(const Common& c, const std::string& text, const Json& j) {
    write_output(c, c.format == "json" ? j.dump(2) + "\n" : text);
}

template <class T>
std::string list_text(const std::vector<T>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << ']';
    return os.str();
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", c.out, "Write the result to this path instead of standard output");
}

void add_model(CLI::App* sub, Model& m, bool needsSpec = true) {
    sub->add_option("--profile", m.profileName, "Built-in parameter profile (paper, micro, nano, meso)");
    sub->add_option("--params", m.paramsFile, "Parameter-set YAML file (overrides --profile)");
    if (needsSpec) {
        sub->add_option("--spec", m.specFile, "Problem-spec YAML file");
        sub->add_option("--q", m.q, "Shortcut for the compatible-sequences spec with this q");
        sub->add_option("--side", m.side, "Sequence side, X or Y");
    }
}

// ---------------------------------------------------------------- subcommands

struct EmbedArgs {
    std::string x, y;
    i64 M = 1;
    i64 firstMax = 0;
    bool viaRembed = false;
    int M0 = 12;
    i64 R = 1;
};

int run_embed(const Common& c, const EmbedArgs& a) {
    const Bits X = parse_bits(input_text(a.x)), Y = parse_bits(input_text(a.y));
    if (a.M < 1) throw ContractError("--M must be at least 1");
    if (a.viaRembed) {
        const auto [ex, ey] = encode_lipschitz(X, Y, a.M0, a.R);
        const auto spec = lipschitz_spec(a.M0, a.R);
        const auto w = rembed_decide(ex, ey, spec, step_constants(a.R));
        if (!w) {
            emit(c, "none\n", Json{{"result", "no"}});
            return kNo;
        }
        const auto d = decode_lipschitz(X, Y, a.M0, a.R, *w);
        emit(c, "φ=" + list_text(d.map.phi) + " M=" + std::to_string(d.M) + "\n",
             Json{{"result", "yes"}, {"phi", d.map.phi}, {"M", d.M}, {"witness", to_json(*w)}});
        return kYes;
    }
    const i64 fm = a.firstMax > 0 ? a.firstMax : a.M;
    const auto m = lipschitz_embed_greedy(X, Y, a.M, fm);
    if (!m) {
        emit(c, "none\n", Json{{"result", "no"}});
        return kNo;
    }
    emit(c, "φ=" + list_text(m->phi) + "\n", Json{{"result", "yes"}, {"phi", m->phi}, {"M", m->M}, {"first_max", fm}});
    return kYes;
}

struct CompatArgs {
    std::string x, y;
    bool viaRembed = false;
    i64 R = 1;
};

int run_compatible(const Common& c, const CompatArgs& a) {
    const Bits X = parse_bits(input_text(a.x)), Y = parse_bits(input_text(a.y));
    std::optional<DeletionSets> d;
    if (a.viaRembed) {
        const auto spec = compatible_spec(Rational(0));
        const auto w = rembed_decide(X, Y, spec, step_constants(a.R));
        if (w) d = decode_compatible(X, Y, *w, a.R);
    } else {
        d = compatible_decide(X, Y);
    }
    if (!d) {
        emit(c, "incompatible\n", Json{{"result", "no"}});
        return kNo;
    }
    emit(c, "compatible D=" + list_text(d->D) + " D'=" + list_text(d->Dprime) + "\n",
         Json{{"result", "yes"}, {"deletions", to_json(*d)}});
    return kYes;
}

struct RoughArgs {
    std::string a, b;
    std::string M = "2", D = "1", C = "1";
    bool general = false;
    bool viaRembed = false;
    int M0 = 2;
    i64 R = 1;
};

int run_roughiso(const Common& c, const RoughArgs& a) {
    const auto A = parse_ints(input_text(a.a)), B = parse_ints(input_text(a.b));
    std::optional<RoughIsoMap> T;
    if (a.viaRembed) {
        const auto spec = roughiso_spec(a.M0);
        const auto w = rembed_decide(gap_encode(A), gap_encode(B), spec, step_constants(a.R));
        if (w) T = decode_roughiso(A, B, *w, a.M0, a.R);
    } else {
        T = rough_iso_search(A, B, parse_rational(a.M), parse_rational(a.D), parse_rational(a.C), !a.general);
    }
    if (!T) {
        emit(c, "none\n", Json{{"result", "no"}});
        return kNo;
    }
    const bool ok = rough_iso_verify(A, B, *T);
    std::string text = "T=";
    bool first = true;
    for (const auto& [x, y] : T->assignment) {
        text += (first ? "{" : ", ") + std::to_string(x) + "->" + std::to_string(y);
        first = false;
    }
    text += (first ? "{}" : "}");
    text += " (M,D,C)=(" + to_string(T->M) + "," + to_string(T->D) + "," + to_string(T->C) + ")";
    text += ok ? " verified\n" : " FAILED verification\n";
    emit(c, text, Json{{"result", "yes"}, {"map", to_json(*T)}, {"verified", ok}});
    return ok ? kYes : kError;
}

struct RembedArgs {
    std::string x, y, verify;
    i64 R = 1;
};

int run_rembed(const Common& c, const Model& m, const RembedArgs& a) {
    const auto spec = m.spec();
    const auto X = parse_symbols(input_text(a.x), spec, Side::X);
    const auto Y = parse_symbols(input_text(a.y), spec, Side::Y);
    const auto sc = step_constants(a.R);
    if (!a.verify.empty()) {
        const auto w = witness_from_json(parse_json(read_text_file(a.verify)));
        const bool ok = rembed_verify(static_cast<i64>(X.size()), static_cast<i64>(Y.size()), w,
                                      symbol_oracles(spec, X, Y, sc));
        emit(c, ok ? "valid\n" : "invalid\n", Json{{"result", ok ? "yes" : "no"}});
        return ok ? kYes : kNo;
    }
    const auto w = rembed_decide(X, Y, spec, sc);
    if (!w) {
        emit(c, "none\n", Json{{"result", "no"}});
        return kNo;
    }
    emit(c, "i=" + list_text(w->iSeq) + " i'=" + list_text(w->iPrimeSeq) + "\n",
         Json{{"result", "yes"}, {"witness", to_json(*w)}});
    return kYes;
}

std::vector<GoodOracle> good_oracles(int upto, const ParameterSet& ps, const ProblemSpec& spec, Side side) {
    std::vector<GoodOracle> g{symbol_good(spec, side)};
    if (upto >= 2) g.push_back([=](const Block& b) { return is_good_level1(b.chars, side, spec, ps).good; });
    if (upto >= 3) throw ResourceError("sampling above level 2 is out of reach");
    return g;
}

struct SampleArgs {
    int level = 1;
    i64 count = 1;
    u64 seed = 0;
    bool good = false;
};

int run_sample(const Common& c, const Model& m, const SampleArgs& a) {
    const auto ps = m.params();
    const auto spec = m.spec();
    const Side side = m.sideValue();
    if (a.level < 0) throw ContractError("--level must be nonnegative");
    const auto goods = good_oracles(a.level, ps, spec, side);
    const auto sampler = level_sampler(a.level, symbol_sampler(spec, side), goods, ps);
    std::string text;
    Json blocks = Json::array();
    for (i64 t = 0; t < a.count; ++t) {
        Rng rng = rng_stream(a.seed, stream_key({0x5a, static_cast<u64>(a.level), static_cast<u64>(t)}));
        const Block b = sampler(a.good, rng);
        Json subs = Json::array();
        const auto bounds = b.sub_boundaries();
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) subs.push_back(Json::array({bounds[k], bounds[k + 1]}));
        blocks.push_back(Json{{"level", b.level},
                              {"length", b.length()},
                              {"sub_blocks", b.subs.size()},
                              {"W", b.W ? Json(*b.W) : Json(nullptr)},
                              {"T", b.T ? Json(*b.T) : Json(nullptr)},
                              {"chars", format_symbols(b.chars, spec, side)},
                              {"subs", subs}});
        text += "block " + std::to_string(t) + ": level " + std::to_string(b.level) + ", " +
                std::to_string(b.length()) + " chars, " + std::to_string(b.subs.size()) + " sub-blocks";
        if (b.W) text += ", W=" + std::to_string(*b.W);
        if (b.T) text += ", T=" + std::to_string(*b.T);
        text += "\n  " + format_symbols(b.chars, spec, side) + "\n";
    }
    emit(c, text, Json{{"seed", a.seed}, {"blocks", blocks}});
    return kYes;
}

struct ClassifyArgs {
    std::string block;
    int level = 1;
};

int run_classify(const Common& c, const Model& m, const ClassifyArgs& a) {
    const auto ps = m.params();
    const auto spec = m.spec();
    const Side side = m.sideValue();
    const auto chars = parse_symbols(input_text(a.block), spec, side);
    if (a.level == 0) {
        if (chars.size() != 1) throw ContractError("a level-0 block is one symbol");
        const auto st = symbol_status(spec, side, chars[0], ps);
        const auto S = symbol_S0(spec, side, chars[0]);
        const char* name = st == SubStatus::Good      ? "good"
                           : st == SubStatus::SemiBad ? "semi-bad"
                           : st == SubStatus::Bad     ? "bad"
                                                      : "unknown";
        emit(c, std::string(name) + " S0=[" + to_string(S.lo) + "," + to_string(S.hi) + "]\n",
             Json{{"status", name}, {"S0", to_json(S)}});
        return st == SubStatus::Good ? kYes : kNo;
    }
    if (a.level != 1) throw ResourceError("classification above level 1 needs catalogs that are out of reach");
    const auto r = is_good_level1(chars, side, spec, ps);
    emit(c, r.good ? "good\n" : "not good: " + r.failed + "\n", to_json(r));
    return r.good ? kYes : kNo;
}

struct CatalogArgs {
    int level = 1;
    bool noSemibad = false;
    i64 maxEmbedChecks = CatalogCaps{}.maxEmbedChecks;
};

std::string catalog_key(const ParameterSet& ps, const ProblemSpec& spec, const CatalogCaps& caps, int level,
                        Side side) {
    const Json d{{"params", to_json(ps)},
                 {"spec", to_json(spec)},
                 {"caps", to_json(caps)},
                 {"level", level},
                 {"side", side_name(side)}};
    return cache_key("catalog", d.dump(), kSchemaVersion);
}

int run_catalog(const Common& c, const Model& m, const CatalogArgs& a) {
    const auto ps = m.params();
    const auto spec = m.spec();
    const Side side = m.sideValue();
    CatalogCaps caps;
    caps.semibad = !a.noSemibad;
    caps.maxEmbedChecks = a.maxEmbedChecks;
    auto store = m.openStore();
    const auto key = catalog_key(ps, spec, caps, a.level, side);
    LevelCatalog cat;
    bool cached = false;
    if (store) {
        if (auto bytes = store->get(key)) {
            cat = level_catalog_from_json(parse_json(*bytes));
            cached = true;
        }
    }
    if (!cached) {
        cat = list_level_catalog(a.level, ps, spec, side, caps);
        if (store)
            store->put(key, to_json(cat).dump(), "catalog level " + std::to_string(a.level) + " " + side_name(side));
    }
    std::string text = "catalog level " + std::to_string(cat.level) + " side " + side_name(cat.side) + "\n";
    text += "good: " + std::to_string(cat.good.size()) + (cat.goodComplete ? " (complete)" : " (incomplete)") + "\n";
    text += "semi-bad: " + std::to_string(cat.semibad.size()) +
            (cat.semibadComplete ? " (complete)" : " (incomplete)") + "\n";
    text += "unresolved: " + std::to_string(cat.unresolved) + "\n";
    for (const auto& n : cat.notes) text += "note: " + n + "\n";
    if (store) text += std::string("store key: ") + key + (cached ? " (cached)" : "") + "\n";
    Json j = to_json(cat);
    if (store) j["store_key"] = key;
    // JSON written with --out carries the full catalog; text mode prints a summary.
    if (c.format == "text" && !c.out.empty()) {
        std::cout << text;
        Common jc = c;
        jc.format = "json";
        emit(jc, "", j);
    } else {
        emit(c, text, j);
    }
    return kYes;
}

struct ConstructArgs {
    int J = 1;
    std::string mapping;
    i64 n = 0, np = 0;
    std::vector<i64> B, Bp;
    int level = 1;
    i64 member = 1;
};

int run_construct(const Common& c, const Model& m, const ConstructArgs& a) {
    const auto ps = m.params();
    if (!a.mapping.empty()) {
        GeneralizedMapping gm;
        MarkedPartitionPair mpp;
        Json extra = Json::object();
        bool ok = false;
        if (a.mapping == "G") {
            const auto fam = build_G_family(a.n, a.np, a.B, a.Bp, a.level, ps);
            if (a.member < 1 || a.member > fam.count) throw ContractError("--member outside [1, family size]");
            mpp = fam.member_pair(a.member);
            gm = fam.member(a.member);
            ok = check_class_G(gm, a.B, a.Bp, a.level, ps);
            extra["family_size"] = fam.count;
        } else if (a.mapping == "H1") {
            const auto fam = build_H1_family(a.n, a.np, a.B, a.level, ps);
            if (a.member < 1 || a.member > fam.count) throw ContractError("--member outside [1, family size]");
            mpp = fam.member_pair(a.member);
            gm = fam.member(a.member);
            ok = check_class_H1(gm, a.B, a.level, ps);
            extra["family_size"] = fam.count;
        } else if (a.mapping == "H2") {
            const auto h = build_H2(a.n, a.np, a.B, a.level, ps);
            mpp = h.mpp;
            gm = h.gm;
            ok = check_class_H2(gm, a.B, a.level, ps);
            extra = Json{{"k", h.k}, {"r", h.r}, {"s", h.s}, {"r_prime", h.rPrime}};
        } else if (a.mapping == "compress") {
            const auto s = compress_embed_schedule(a.n, a.np, a.level, ps);
            emit(c,
                 "R_j=" + std::to_string(s.Rj) + " k=" + std::to_string(s.k) + " r=" + std::to_string(s.r) +
                     " s=" + std::to_string(s.s) + (s.direct ? " direct" : "") +
                     (s.proofBound ? " within-proof-bound" : "") + "\n",
                 to_json(s));
            return kYes;
        } else {
            throw ContractError("--mapping must be G, H1, H2 or compress");
        }
        Json j = to_json(mpp, gm.tags);
        j["segments"] = to_json(gm)["segments"];
        j["diagram"] = mapping_diagram(gm);
        j["class_check"] = ok;
        j["details"] = extra;
        std::string text = a.mapping + " mapping, " + std::to_string(gm.block_count()) + " blocks, class check " +
                           (ok ? "passed" : "FAILED") + "\nP =" + list_text(mpp.P) + "\nP'=" + list_text(mpp.Pp) + "\n";
        emit(c, text, j);
        return ok ? kYes : kError;
    }
    const auto spec = m.spec();
    auto store = m.openStore();
    SymbolSeq seq;
    const Json desc{{"params", to_json(ps)}, {"spec", to_json(spec)}, {"caps", to_json(CatalogCaps{})}, {"J", a.J}};
    const auto key = cache_key("construct", desc.dump(), kSchemaVersion);
    if (store) {
        if (auto bytes = store->get(key)) seq = parse_json(*bytes).at("sequence").get<SymbolSeq>();
    }
    if (seq.empty()) {
        seq = deterministic_sequence(a.J, ps, spec);
        if (store) store->put(key, Json{{"sequence", seq}}.dump(), "construct J=" + std::to_string(a.J));
    }
    emit(c, format_symbols(seq, spec, Side::X) + "\n",
         Json{{"J", a.J}, {"length", seq.size()}, {"sequence", format_symbols(seq, spec, Side::X)}});
    return kYes;
}

struct ExperimentArgs {
    std::string name;
    int level = 1;
    i64 trials = 1000;
    u64 seed = 0;
    std::vector<double> p{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<i64> n{10, 20, 40};
    std::vector<i64> M{1, 2, 3};
    std::vector<double> q{0.0, 0.05, 0.1, 0.2, 0.3};
    i64 compatN = 50;
    i64 inner = 200;
    i64 forcedW = -1;
    unsigned workers = 1;
};

int run_experiment(const Common& c, const Model& m, const ExperimentArgs& a) {
    RunOptions opt;
    opt.workers = a.workers;
    ExperimentResult r;
    if (a.name == "tail") {
        r = tail_curve(a.level, m.params(), m.spec(), a.trials, a.p, a.seed, m.sideValue(), a.inner, opt);
    } else if (a.name == "length-moment") {
        std::optional<i64> fw;
        if (a.forcedW >= 0) fw = a.forcedW;
        r = length_moment(a.level, m.params(), m.spec(), a.trials, a.seed, fw, opt);
    } else if (a.name == "good-fraction") {
        r = good_fraction(a.level, m.params(), m.spec(), a.trials, a.seed, m.sideValue(), opt);
    } else if (a.name == "minimal-M") {
        r = minimal_M_curve(a.n, a.M, a.trials, a.seed, opt);
    } else if (a.name == "compatibility-q") {
        r = compatibility_q_curve(a.q, a.compatN, a.trials, a.seed, opt);
    } else {
        throw ContractError("unknown experiment '" + a.name + "'");
    }
    const std::string csv = experiment_csv(r);
    const Json desc = experiment_descriptor(r);
    if (auto store = m.openStore()) {
        const auto key = cache_key("experiment", desc.dump(), kSchemaVersion);
        store->put(key, csv, "experiment " + r.name);
    }
    if (!c.out.empty()) {
        write_output(c, c.format == "json" ? to_json(r).dump(2) + "\n" : csv);
        std::ofstream side(c.out + ".json", std::ios::binary);
        if (!side) throw ContractError("cannot write '" + c.out + ".json'");
        side << desc.dump(2) << "\n";
        return kYes;
    }
    emit(c, csv, to_json(r));
    return kYes;
}

int run_validate(const Common& c, const Model& m) {
    const auto ps = m.params();
    const auto rep = validate_parameters(ps);
    std::string text = "parameter set " + ps.name + ": " + (rep.conforming ? "conforming" : "non-conforming") +
                       (rep.usable ? ", usable" : ", unusable") + "\n";
    for (const auto& ch : rep.checks)
        text += std::string(ch.pass ? "  pass " : "  FAIL ") + ch.name + (ch.detail.empty() ? "" : ": " + ch.detail) +
                "\n";
    Json j = to_json(rep);
    j["params"] = to_json(ps);
    emit(c, text, j);
    return rep.conforming ? kYes : kNo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale sequence embedding toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mse 1.0");

    Common common;
    Model model;

    EmbedArgs ea;
    auto* embed = app.add_subcommand("embed", "Lipschitz embedding of bit sequences");
    add_common(embed, common);
    embed->add_option("--x", ea.x, "X bits (inline or file)")->required();
    embed->add_option("--y", ea.y, "Y bits (inline or file)")->required();
    embed->add_option("--M", ea.M, "Lipschitz constant")->required();
    embed->add_option("--first-max", ea.firstMax, "Bound on phi(1) (default M)");
    embed->add_flag("--via-rembed", ea.viaRembed, "Decide through the R-embedding reduction and decode");
    embed->add_option("--M0", ea.M0, "Word length of the reduction");
    embed->add_option("--R", ea.R, "R of the reduction");

    CompatArgs ca;
    auto* compat = app.add_subcommand("compatible", "Compatibility of two bit sequences");
    add_common(compat, common);
    compat->add_option("--x", ca.x, "X bits (inline or file)")->required();
    compat->add_option("--y", ca.y, "Y bits (inline or file)")->required();
    compat->add_flag("--via-rembed", ca.viaRembed, "Decide through the R-embedding reduction and decode");
    compat->add_option("--R", ca.R, "R of the reduction");

    RoughArgs ra;
    auto* rough = app.add_subcommand("roughiso", "Rough isometry between point sets");
    add_common(rough, common);
    rough->add_option("--a", ra.a, "Source points (inline or file)")->required();
    rough->add_option("--b", ra.b, "Target points (inline or file)")->required();
    rough->add_option("--M", ra.M, "Distortion factor");
    rough->add_option("--D", ra.D, "Additive distortion");
    rough->add_option("--C", ra.C, "Density radius");
    rough->add_flag("--general", ra.general, "Search non-monotone assignments too");
    rough->add_flag("--via-rembed", ra.viaRembed, "Decide through the gap-class reduction and decode");
    rough->add_option("--M0", ra.M0, "Gap-class tolerance of the reduction");
    rough->add_option("--R", ra.R, "R of the reduction");

    RembedArgs rb;
    auto* rembed = app.add_subcommand("rembed", "R-embedding of symbol sequences under a problem spec");
    add_common(rembed, common);
    add_model(rembed, model);
    rembed->add_option("--x", rb.x, "X symbols (inline or file)")->required();
    rembed->add_option("--y", rb.y, "Y symbols (inline or file)")->required();
    rembed->add_option("--R", rb.R, "R (level-0 step constants 2R, 1, 3R^2)");
    rembed->add_option("--verify", rb.verify, "Verify this witness JSON instead of deciding");

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Sample level-j blocks");
    add_common(sample, common);
    add_model(sample, model);
    sample->add_option("--level", sa.level, "Block level");
    sample->add_option("--count", sa.count, "Number of blocks");
    sample->add_option("--seed", sa.seed, "Master seed")->required();
    sample->add_flag("--good", sa.good, "Draw from the good-conditioned law");

    ClassifyArgs cl;
    auto* classify = app.add_subcommand("classify", "Classify a level-0 or level-1 block");
    add_common(classify, common);
    add_model(classify, model);
    classify->add_option("--block", cl.block, "Block characters (inline or file)")->required();
    classify->add_option("--level", cl.level, "Block level (0 or 1)");

    CatalogArgs ct;
    auto* catalog = app.add_subcommand("catalog", "Good and semi-bad block catalogs");
    add_common(catalog, common);
    add_model(catalog, model);
    catalog->add_option("--level", ct.level, "Catalog level (0 or 1)");
    catalog->add_flag("--no-semibad", ct.noSemibad, "Skip the semi-bad list");
    catalog->add_option("--max-embed-checks", ct.maxEmbedChecks, "Embedding checks per semi-bad candidate list");
    catalog->add_option("--store", model.store, "Store root (default: $MSE_STORE)");

    ConstructArgs cs;
    auto* construct = app.add_subcommand("construct", "Deterministic sequences and mapping builders");
    add_common(construct, common);
    add_model(construct, model);
    construct->add_option("--J", cs.J, "Top level of the deterministic sequence");
    construct->add_option("--mapping", cs.mapping, "Build a mapping instead: G, H1, H2 or compress");
    construct->add_option("--n", cs.n, "X length in level-j blocks");
    construct->add_option("--np", cs.np, "Y length in level-j blocks");
    construct->add_option("--B", cs.B, "Bad X positions")->delimiter(',');
    construct->add_option("--Bp", cs.Bp, "Bad Y positions")->delimiter(',');
    construct->add_option("--level", cs.level, "Level j of the mapping");
    construct->add_option("--member", cs.member, "Family member index h");
    construct->add_option("--store", model.store, "Store root (default: $MSE_STORE)");

    ExperimentArgs xa;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo experiments");
    add_common(experiment, common);
    add_model(experiment, model);
    experiment
        ->add_option("name", xa.name, "tail, length-moment, good-fraction, minimal-M or compatibility-q")
        ->required();
    experiment->add_option("--level", xa.level, "Block level");
    experiment->add_option("--trials", xa.trials, "Trials per grid point");
    experiment->add_option("--seed", xa.seed, "Master seed")->required();
    experiment->add_option("--p", xa.p, "Tail thresholds")->delimiter(',');
    experiment->add_option("--n", xa.n, "Lengths (minimal-M) or the single length (compatibility-q)")
        ->delimiter(',');
    experiment->add_option("--M", xa.M, "Lipschitz constants")->delimiter(',');
    experiment->add_option("--qs", xa.q, "q grid for compatibility-q")->delimiter(',');
    experiment->add_option("--inner", xa.inner, "Inner trials for nested S estimates");
    experiment->add_option("--forced-W", xa.forcedW, "Force every geometric draw to this value");
    experiment->add_option("--workers", xa.workers, "Worker threads (0: all cores)");
    experiment->add_option("--store", model.store, "Store root (default: $MSE_STORE)");

    auto* validate = app.add_subcommand("validate-params", "Check a parameter set against the constraints");
    add_common(validate, common);
    add_model(validate, model, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kError;
    }

    try {
        if (*embed) return run_embed(common, ea);
        if (*compat) return run_compatible(common, ca);
        if (*rough) return run_roughiso(common, ra);
        if (*rembed) return run_rembed(common, model, rb);
        if (*sample) return run_sample(common, model, sa);
        if (*classify) return run_classify(common, model, cl);
        if (*catalog) return run_catalog(common, model, ct);
        if (*construct) return run_construct(common, model, cs);
        if (*experiment) {
            if (xa.name == "compatibility-q" && experiment->count("--n")) {
                if (xa.n.size() != 1) throw ContractError("compatibility-q takes a single --n");
                xa.compatN = xa.n[0];
            }
            return run_experiment(common, model, xa);
        }
        if (*validate) return run_validate(common, model);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
    } catch (const InvariantError& e) {
        std::cerr << "invariant error: " << e.what() << "\n";
    } catch (const ContractError& e) {
        std::cerr << "contract error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}

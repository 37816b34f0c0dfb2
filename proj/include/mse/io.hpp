#pragma once

#include "mse/blocks.hpp"
#include "mse/classify.hpp"
#include "mse/construct.hpp"
#include "mse/deciders.hpp"
#include "mse/experiments.hpp"
#include "mse/partmaps.hpp"

#include <json.hpp>

namespace mse {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------- YAML inputs

// Keys: alpha beta delta m k0 R L0 and optional name; `base: <profile>` seeds unset keys from a built-in profile.
ParameterSet parse_parameter_set(const std::string& yaml);
std::string parameter_set_yaml(const ParameterSet& ps);

// `kind: compatible` (q), `lipschitz` (M0, R), `roughiso` (M0, K) or `table` (x, y, relation).
ProblemSpec parse_problem_spec(const std::string& yaml);
std::string problem_spec_yaml(const ProblemSpec& spec);

// Reads a whole file; ContractError when it cannot be opened.
std::string read_text_file(const std::string& path);

// ---------------------------------------------------------------- sequences

// Whitespace-separated tokens; a single token made only of 0/1 is also read digit by digit.
Bits parse_bits(const std::string& text);
std::vector<i64> parse_ints(const std::string& text);
// Tokens are alphabet names of the given side; plain indices are accepted for gap-class alphabets.
SymbolSeq parse_symbols(const std::string& text, const ProblemSpec& spec, Side side);
std::string format_symbols(const SymbolSeq& s, const ProblemSpec& spec, Side side);

// ---------------------------------------------------------------- JSON

// Parses JSON, mapping syntax errors to ParseError with line and column.
Json parse_json(const std::string& text);

Json to_json(const ParameterSet& ps);
Json to_json(const ProblemSpec& spec);  // canonical form, also used for cache keys
Json to_json(const EmbedWitness& w);
EmbedWitness witness_from_json(const Json& j);
Json to_json(const LipschitzMap& m);
Json to_json(const DeletionSets& d);
Json to_json(const RoughIsoMap& t);
Json to_json(const BlockDistribution& d);
BlockDistribution block_distribution_from_json(const Json& j);
Json to_json(const LevelCatalog& c);
LevelCatalog level_catalog_from_json(const Json& j);
Json to_json(const CatalogCaps& c);
Json to_json(const BlockHierarchy& h);
Json to_json(const GeneralizedMapping& gm);
// Cut lists, marked index set and class tags.
Json to_json(const MarkedPartitionPair& mpp, const std::set<std::string>& tags = {});
// Corner coordinates of every segment, for plotting.
Json mapping_diagram(const GeneralizedMapping& gm);
Json to_json(const CompressSchedule& s);
Json to_json(const GoodReport& r);
Json to_json(const ProbInterval& p);
Json to_json(const ValidationReport& v);

// Descriptor sidecar: name, parameters, seed, trials, columns.
Json experiment_descriptor(const ExperimentResult& r);
Json to_json(const ExperimentResult& r);

// ---------------------------------------------------------------- CSV

// Header: key columns, estimate, lo, hi, successes, trials, unknown, reference; one row per abscissa.
std::string experiment_csv(const ExperimentResult& r);

}  // namespace mse

#pragma once

#include "mse/blocks.hpp"
#include "mse/classify.hpp"

namespace mse {

struct CatalogCaps {
    i64 maxStates = 5000000;      // candidate blocks enumerated per list
    int semibadMaxBad = 1;        // bad characters per semi-bad candidate at level 1
    int partnerMaxBad = 1;        // bad characters per enumerated partner
    i64 partnerMaxLength = 400;   // partner length cap on top of the horizon
    i64 horizonFactor = 3;        // partners up to horizonFactor * R * |X| characters
    i64 maxEmbedChecks = 100000;
    bool semibad = true;          // build the semi-bad list at level 1
    i64 maxExtensionTries = 64;   // fillers tried per extension
};

struct LevelCatalog {
    int level = 0;
    Side side = Side::X;
    std::vector<WeightedBlock> good, semibad;  // sorted lexicographically by characters
    bool goodComplete = false;
    bool semibadComplete = false;
    i64 unresolved = 0;              // semi-bad candidates whose S interval straddles the threshold
    std::optional<int> truncatedAt;  // symbol-index truncation for gap-class alphabets
    std::vector<std::string> notes;  // reasons a list is incomplete
    CatalogCaps caps;
};

// Levels 0 and 1; higher levels raise ResourceError.
LevelCatalog list_level_catalog(int j, const ParameterSet& ps, const ProblemSpec& spec, Side side,
                                const CatalogCaps& caps = {});

struct CatalogSet {
    std::vector<LevelCatalog> X, Y;  // indexed by level
    const LevelCatalog& at(Side s, int j) const;
};
CatalogSet build_catalogs(int maxLevel, const ParameterSet& ps, const ProblemSpec& spec, const CatalogCaps& caps = {});

bool catalog_contains(const std::vector<WeightedBlock>& list, const SymbolSeq& chars);

// Level-(j+1) block whose first sub-block is `xgood` and whose remaining sub-blocks repeat one filler from
// the level-j good list, tried in lexicographic order; the first filler giving a good block wins.
// `skip` fillers are passed over first, which lets callers enumerate alternatives.
Block extend_good_block(const SymbolSeq& xgood, int j, Side side, const ParameterSet& ps, const ProblemSpec& spec,
                        const CatalogSet& cats, std::size_t skip = 0);

// Characters of a level-J X block whose prefix block is good at every level 0..J.
SymbolSeq deterministic_sequence(int J, const ParameterSet& ps, const ProblemSpec& spec, const CatalogSet& cats);
SymbolSeq deterministic_sequence(int J, const ParameterSet& ps, const ProblemSpec& spec, const CatalogCaps& caps = {});

}  // namespace mse

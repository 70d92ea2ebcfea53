#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace polyg::taxonomy {

// Question shapes over (source, predicate, target) triples. A '*' slot is
// unconstrained. Basic questions fix the source entity and constrain the
// other two slots or not; nested questions chain sub-questions.
enum class Pattern {
    sxx,     // source known, predicate and target open
    spx,     // source and predicate known, target open
    sxo,     // source and target known, predicate open
    spo,     // all three constrained
    nested,  // outer basic question over answers of inner questions
};

// Serialized labels: "s**", "sp*", "s*o", "spo", "nested".
std::string to_string(Pattern p);
std::optional<Pattern> pattern_from_string(std::string_view s);

bool is_basic(Pattern p);

// The four basic patterns in canonical order.
const std::vector<Pattern>& basic_patterns();

// Retrieval strategy attached to each basic pattern. Nested questions have
// no strategy of their own; they decompose into basic steps.
enum class Strategy {
    neighbor_expansion,         // s** : one-hop fan-out from the source
    meta_path_walk,             // sp* : follow the named relation chain
    shortest_paths,             // s*o : top-k shortest connections
    constrained_shortest_paths, // spo : top-k connections through named relations
};

std::string to_string(Strategy s);
std::optional<Strategy> strategy_for(Pattern p);

// A nested question is an outer basic pattern whose anchor entities come
// from inner sub-questions; inner steps are always sp* lookups.
struct NestedShape {
    Pattern outer = Pattern::sxx;
    Pattern inner = Pattern::spx;
    bool operator==(const NestedShape&) const = default;
};

// All supported nested shapes: one per basic outer pattern.
const std::vector<NestedShape>& nested_shapes();

// One-line descriptions used when a model must pick a pattern.
std::string describe(Pattern p);

}  // namespace polyg::taxonomy

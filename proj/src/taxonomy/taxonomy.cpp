#include "polyg/taxonomy/taxonomy.hpp"

namespace polyg::taxonomy {

std::string to_string(Pattern p) {
    switch (p) {
        case Pattern::sxx: return "s**";
        case Pattern::spx: return "sp*";
        case Pattern::sxo: return "s*o";
        case Pattern::spo: return "spo";
        case Pattern::nested: return "nested";
    }
    return "s**";
}

std::optional<Pattern> pattern_from_string(std::string_view s) {
    if (s == "s**") return Pattern::sxx;
    if (s == "sp*") return Pattern::spx;
    if (s == "s*o") return Pattern::sxo;
    if (s == "spo") return Pattern::spo;
    if (s == "nested") return Pattern::nested;
    return std::nullopt;
}

bool is_basic(Pattern p) { return p != Pattern::nested; }

const std::vector<Pattern>& basic_patterns() {
    static const std::vector<Pattern> kAll{Pattern::sxx, Pattern::spx,
                                           Pattern::sxo, Pattern::spo};
    return kAll;
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::neighbor_expansion: return "neighbor_expansion";
        case Strategy::meta_path_walk: return "meta_path_walk";
        case Strategy::shortest_paths: return "shortest_paths";
        case Strategy::constrained_shortest_paths:
            return "constrained_shortest_paths";
    }
    return "neighbor_expansion";
}

std::optional<Strategy> strategy_for(Pattern p) {
    switch (p) {
        case Pattern::sxx: return Strategy::neighbor_expansion;
        case Pattern::spx: return Strategy::meta_path_walk;
        case Pattern::sxo: return Strategy::shortest_paths;
        case Pattern::spo: return Strategy::constrained_shortest_paths;
        case Pattern::nested: return std::nullopt;
    }
    return std::nullopt;
}

const std::vector<NestedShape>& nested_shapes() {
    static const std::vector<NestedShape> kShapes{
        {Pattern::sxx, Pattern::spx},
        {Pattern::spx, Pattern::spx},
        {Pattern::sxo, Pattern::spx},
        {Pattern::spo, Pattern::spx},
    };
    return kShapes;
}

std::string describe(Pattern p) {
    switch (p) {
        case Pattern::sxx:
            return "one known entity; ask for everything directly connected to it";
        case Pattern::spx:
            return "one known entity and a named relation chain; ask what the chain reaches";
        case Pattern::sxo:
            return "two known entities; ask how they are connected";
        case Pattern::spo:
            return "two known entities and named relations; ask how they are "
                   "connected through those relations";
        case Pattern::nested:
            return "a question whose anchor entity must first be found by "
                   "answering an inner question";
    }
    return "";
}

}  // namespace polyg::taxonomy

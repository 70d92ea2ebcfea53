#include <doctest.h>

#include "polyg/taxonomy/taxonomy.hpp"

using namespace polyg::taxonomy;

TEST_CASE("pattern labels round-trip") {
    for (Pattern p : {Pattern::sxx, Pattern::spx, Pattern::sxo, Pattern::spo,
                      Pattern::nested}) {
        auto back = pattern_from_string(to_string(p));
        REQUIRE(back.has_value());
        CHECK(*back == p);
    }
    CHECK(to_string(Pattern::sxx) == std::string("s**"));
    CHECK(to_string(Pattern::spx) == std::string("sp*"));
    CHECK(to_string(Pattern::sxo) == std::string("s*o"));
    CHECK(to_string(Pattern::spo) == std::string("spo"));
    CHECK(to_string(Pattern::nested) == std::string("nested"));

    CHECK_FALSE(pattern_from_string("sp").has_value());
    CHECK_FALSE(pattern_from_string("").has_value());
    CHECK_FALSE(pattern_from_string("S**").has_value());
}

TEST_CASE("basic patterns exclude nested") {
    auto basics = basic_patterns();
    CHECK(basics.size() == 4);
    for (Pattern p : basics) CHECK(is_basic(p));
    CHECK_FALSE(is_basic(Pattern::nested));
}

TEST_CASE("each basic pattern maps to one strategy") {
    CHECK(strategy_for(Pattern::sxx) == Strategy::neighbor_expansion);
    CHECK(strategy_for(Pattern::spx) == Strategy::meta_path_walk);
    CHECK(strategy_for(Pattern::sxo) == Strategy::shortest_paths);
    CHECK(strategy_for(Pattern::spo) == Strategy::constrained_shortest_paths);
    CHECK_FALSE(strategy_for(Pattern::nested).has_value());
}

TEST_CASE("nested shapes pair every basic outer with an inner hop") {
    auto shapes = nested_shapes();
    REQUIRE(shapes.size() == 4);
    for (const auto& s : shapes) {
        CHECK(is_basic(s.outer));
        CHECK(s.inner == Pattern::spx);
    }
    // Each basic pattern appears exactly once as the outer.
    for (Pattern p : basic_patterns()) {
        int hits = 0;
        for (const auto& s : shapes) {
            if (s.outer == p) ++hits;
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("descriptions name the bound slots") {
    CHECK(describe(Pattern::sxx) == std::string(
              "one known entity; ask for everything directly connected to it"));
    CHECK(describe(Pattern::spo) == std::string(
              "two known entities and named relations; ask how they are "
              "connected through those relations"));
    CHECK_FALSE(describe(Pattern::nested).empty());
}

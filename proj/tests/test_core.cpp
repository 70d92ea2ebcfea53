#include <doctest.h>

#include "polyg/core/result.hpp"
#include "polyg/core/scalar.hpp"
#include "polyg/core/text.hpp"

using namespace polyg;

TEST_CASE("Result carries value or error") {
    Result<int> ok(42);
    CHECK(ok.ok());
    CHECK(*ok == 42);

    Result<int> bad(Error{"nope"});
    CHECK(!bad.ok());
    CHECK(bad.error().message == "nope");
}

TEST_CASE("scalar_to_string canonical forms") {
    CHECK(scalar_to_string(Scalar(std::int64_t{42})) == "42");
    CHECK(scalar_to_string(Scalar(std::int64_t{-7})) == "-7");
    CHECK(scalar_to_string(Scalar(1.5)) == "1.5");
    CHECK(scalar_to_string(Scalar(std::string("abc"))) == "abc");
}

TEST_CASE("scalar_order ranks by kind then value") {
    Scalar i2{std::int64_t{2}}, i3{std::int64_t{3}};
    Scalar d2{2.0};
    Scalar sa{std::string("a")};

    CHECK(scalar_order(i2, i3) < 0);
    CHECK(scalar_order(i3, i2) > 0);
    CHECK(scalar_order(i2, i2) == 0);
    // Kind rank separates equal numeric values: int sorts before double.
    CHECK(scalar_order(i2, d2) < 0);
    CHECK(scalar_order(d2, sa) < 0);
    CHECK(scalar_order(i2, sa) < 0);
}

TEST_CASE("compare_for_query crosses numeric kinds") {
    Scalar i2{std::int64_t{2}};
    Scalar d2{2.0};
    Scalar d25{2.5};
    Scalar s{std::string("2")};

    CHECK(compare_for_query(i2, d2) == 0);
    CHECK(compare_for_query(i2, d25) < 0);
    CHECK(compare_for_query(d25, i2) > 0);
    CHECK(compare_for_query(i2, s) == -2);
    CHECK(compare_for_query(s, i2) == -2);
    CHECK(compare_for_query(Scalar(std::string("a")), Scalar(std::string("b"))) == -1);
}

TEST_CASE("text helpers") {
    CHECK(to_lower("AbC-1") == "abc-1");
    CHECK(trim("  x y  ") == "x y");
    CHECK(collapse_whitespace("  a \t b\n\nc ") == "a b c");
    CHECK(normalize_name("  Isaac   NEWTON ") == "isaac newton");

    CHECK(word_tokens("Isaac Newton, born 1643!") ==
          std::vector<std::string>{"isaac", "newton", "born", "1643"});

    std::vector<std::string> hay{"the", "theory", "of", "relativity", "won"};
    CHECK(tokens_contain(hay, {"theory", "of", "relativity"}));
    CHECK(tokens_contain(hay, {"won"}));
    CHECK(!tokens_contain(hay, {"theory", "relativity"}));
    CHECK(!tokens_contain(hay, {}));
}

TEST_CASE("fnv1a matches the published 64-bit vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);

    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("hello world") == "779a65e7023cd2e7");
    CHECK(fnv1a_hex("categorize|What influenced Newton?") == "a8bd95544324e50f");
}

TEST_CASE("edit_distance") {
    CHECK(edit_distance("", "") == 0);
    CHECK(edit_distance("abc", "") == 3);
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("writes", "paper") == 5);
    CHECK(edit_distance("writes", "cited_by") == 6);
    CHECK(edit_distance("author", "paper") == 5);
}

TEST_CASE("split and join") {
    CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split("", ',') == std::vector<std::string>{""});
    CHECK(join({"a", "b", "c"}, ", ") == "a, b, c");
    CHECK(join({}, ",") == "");
}

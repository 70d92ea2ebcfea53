#include <doctest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polyg/bench/generate.hpp"
#include "polyg/bench/templates.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"

using namespace polyg;
using namespace polyg::bench;

namespace {

// Three authors, three papers; p3 has no authors so answer queries bound
// to it come back empty.
graph::PropertyGraph bench_graph() {
    graph::PropertyGraph g;
    g.add_entity({"a1", "author", "Grace Park", {}});
    g.add_entity({"a2", "author", "Henry Wu", {}});
    g.add_entity({"a3", "author", "Ivy Chen", {}});
    g.add_entity({"p1", "paper", "Deep Graphs",
                  {{"year", Scalar{std::int64_t{2020}}}}});
    g.add_entity({"p2", "paper", "Fast Walks",
                  {{"year", Scalar{std::int64_t{2021}}}}});
    g.add_entity({"p3", "paper", "Dusty Tome",
                  {{"year", Scalar{std::int64_t{1999}}}}});
    g.add_relation({0, 3, "wrote", {}});
    g.add_relation({1, 3, "wrote", {}});
    g.add_relation({1, 4, "wrote", {}});
    g.add_relation({2, 4, "wrote", {}});
    g.set_inverse_hint({{"wrote", "written_by"}});
    g.rebuild_indexes();
    return graph::materialize_inverses(std::move(g));
}

const char* kTemplateDoc = R"({
  "domain": "minilib",
  "schema": {
    "entities": {"author": [], "paper": ["year"]},
    "relations": [["author", "wrote", "paper"],
                  ["paper", "written_by", "author"]]
  },
  "templates": [
    {"id": "sxx-authors", "pattern": "s**",
     "text": "Give me a short profile of \"[author name]\".",
     "selection": "MATCH (a:author) RETURN a AS `author name`"},
    {"id": "spx-authors-of", "pattern": "sp*",
     "text": "Who wrote \"[paper title]\"?",
     "selection": "MATCH (p:paper) RETURN p AS `paper title`",
     "answer": "MATCH (p {id: '[paper title]'})-[:written_by]->(a) RETURN DISTINCT a"},
    {"id": "spx-nobody", "pattern": "sp*",
     "text": "Which papers did \"[ghost]\" write?",
     "selection": "MATCH (a:author) WHERE a.id = 'nobody' RETURN a AS `ghost`"}
  ]
})";

TemplateFile load_fixture() {
    std::istringstream in(kTemplateDoc);
    auto file = load_templates(in, "inline");
    REQUIRE_MESSAGE(file.ok(), (file.ok() ? "" : file.error().message));
    return std::move(*file);
}

}  // namespace

TEST_CASE("slot extraction keeps first-appearance order, deduplicated") {
    CHECK(extract_slots("between \"[a]\" and \"[b]\", then [a] again") ==
          std::vector<std::string>({"a", "b"}));
    CHECK(extract_slots("no placeholders here").empty());
    CHECK(extract_slots("empty [] is skipped, [x] is not") ==
          std::vector<std::string>{"x"});
    CHECK(extract_slots("unterminated [x").empty());
}

TEST_CASE("slot substitution replaces known names and keeps unknown ones") {
    std::map<std::string, std::string> values = {{"a", "Alpha"}, {"b", "Beta"}};
    CHECK(substitute_slots("[a] meets [b], then [a]", values) ==
          "Alpha meets Beta, then Alpha");
    CHECK(substitute_slots("[a] and [mystery]", values) ==
          "Alpha and [mystery]");
    CHECK(substitute_slots("no slots", values) == "no slots");
}

TEST_CASE("template files load with parsed, schema-checked queries") {
    auto file = load_fixture();
    CHECK(file.domain == "minilib");
    REQUIRE(file.templates.size() == 3);

    const auto& sxx = file.templates[0];
    CHECK(sxx.id == "sxx-authors");
    CHECK(sxx.pattern == taxonomy::Pattern::sxx);
    CHECK(sxx.slots == std::vector<std::string>{"author name"});
    CHECK_FALSE(sxx.answer_text.has_value());

    const auto& spx = file.templates[1];
    CHECK(spx.pattern == taxonomy::Pattern::spx);
    CHECK(spx.answer_text.has_value());
    CHECK(file.schema.entity_types.count("paper") == 1);
    CHECK(file.schema.entity_types.at("paper").count("year") == 1);
}

TEST_CASE("template loading rejects broken documents with located errors") {
    auto load = [](const std::string& doc) {
        std::istringstream in(doc);
        return load_templates(in, "bad.json");
    };

    SUBCASE("selection naming an unknown relation") {
        auto r = load(R"({
          "domain": "d",
          "schema": {"entities": {"author": []},
                     "relations": [["author", "wrote", "author"]]},
          "templates": [{"id": "t1", "pattern": "sp*",
            "text": "Who reviewed [x]?",
            "selection": "MATCH (a:author)-[:reviewed]->(b) RETURN a AS `x`"}]
        })");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("t1") != std::string::npos);
        CHECK(r.error().message.find("reviewed") != std::string::npos);
    }

    SUBCASE("slot not bound by a selection column") {
        auto r = load(R"({
          "domain": "d",
          "schema": {"entities": {"author": []}, "relations": []},
          "templates": [{"id": "t1", "pattern": "s**",
            "text": "About [author name].",
            "selection": "MATCH (a:author) RETURN a"}]
        })");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("slot [author name]") != std::string::npos);
    }

    SUBCASE("answer query on a pattern that cannot carry gold") {
        auto r = load(R"({
          "domain": "d",
          "schema": {"entities": {"author": []}, "relations": []},
          "templates": [{"id": "t1", "pattern": "s**",
            "text": "About [x].",
            "selection": "MATCH (a:author) RETURN a AS `x`",
            "answer": "MATCH (a:author) RETURN a"}]
        })");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("only supported") != std::string::npos);
    }

    SUBCASE("duplicate template ids") {
        auto r = load(R"({
          "domain": "d",
          "schema": {"entities": {"author": []}, "relations": []},
          "templates": [
            {"id": "t1", "pattern": "s**", "text": "[x]",
             "selection": "MATCH (a:author) RETURN a AS `x`"},
            {"id": "t1", "pattern": "s**", "text": "[x]",
             "selection": "MATCH (a:author) RETURN a AS `x`"}]
        })");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("duplicate") != std::string::npos);
    }

    SUBCASE("text without placeholders") {
        auto r = load(R"({
          "domain": "d",
          "schema": {"entities": {"author": []}, "relations": []},
          "templates": [{"id": "t1", "pattern": "s**", "text": "static",
            "selection": "MATCH (a:author) RETURN a"}]
        })");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("no [slot]") != std::string::npos);
    }

    SUBCASE("malformed json names the origin") {
        auto r = load("{not json");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("bad.json") != std::string::npos);
    }
}

TEST_CASE("gold answers come from the bound answer query") {
    auto g = bench_graph();
    auto file = load_fixture();
    const auto& spx = file.templates[1];

    auto gold = gold_for(g, spx, {{"paper title", "p1"}});
    REQUIRE(gold.ok());
    CHECK(*gold == std::vector<std::string>({"grace park", "henry wu"}));

    auto empty = gold_for(g, spx, {{"paper title", "p3"}});
    REQUIRE_FALSE(empty.ok());
    CHECK(empty.error().message.find("no names") != std::string::npos);
}

TEST_CASE("annotate fills gold only for templates with answer queries") {
    auto g = bench_graph();
    auto file = load_fixture();

    BenchmarkQuestion q;
    q.slots = {{"paper title", "p2"}};
    auto annotated = annotate(g, file.templates[1], q);
    REQUIRE(annotated.ok());
    REQUIRE(annotated->gold_answers.has_value());
    CHECK(*annotated->gold_answers ==
          std::vector<std::string>({"henry wu", "ivy chen"}));

    BenchmarkQuestion plain;
    plain.slots = {{"author name", "a1"}};
    auto untouched = annotate(g, file.templates[0], plain);
    REQUIRE(untouched.ok());
    CHECK_FALSE(untouched->gold_answers.has_value());
}

TEST_CASE("generation is deterministic and binds names to the text") {
    auto g = bench_graph();
    auto file = load_fixture();
    std::vector<QuestionTemplate> templates = {file.templates[0],
                                               file.templates[1]};

    GenOptions opts;
    opts.per_template = 2;
    opts.seed = 42;
    opts.graph_id = "minilib";

    auto first = generate(g, templates, opts);
    REQUIRE(first.ok());
    CHECK(first->questions.size() == 4);
    CHECK(first->skips.empty());

    auto serialize = [](const GenOutput& out) {
        std::string s;
        for (const auto& q : out.questions) s += to_json_line(q) + "\n";
        return s;
    };
    auto second = generate(g, templates, opts);
    REQUIRE(second.ok());
    CHECK(serialize(*first) == serialize(*second));

    for (const auto& q : first->questions) {
        CHECK(q.graph_id == "minilib");
        CHECK(q.paraphrases.empty());
        REQUIRE(q.slots.size() == 1);
        const auto& [slot, id] = *q.slots.begin();
        auto index = g.index_of(id);
        REQUIRE(index.has_value());
        // The question text carries the entity's display name, the slot
        // map its id.
        CHECK(q.question.find(g.entity(*index).name) != std::string::npos);
        if (q.template_id == "spx-authors-of") {
            REQUIRE(q.gold_answers.has_value());
            CHECK_FALSE(q.gold_answers->empty());
        } else {
            CHECK_FALSE(q.gold_answers.has_value());
        }
    }
    CHECK(first->questions[0].id == "sxx-authors-q1");
    CHECK(first->questions[1].id == "sxx-authors-q2");
}

TEST_CASE("an even total split sends the remainder to earlier templates") {
    auto g = bench_graph();
    auto file = load_fixture();
    std::vector<QuestionTemplate> templates = {file.templates[0],
                                               file.templates[1]};

    GenOptions opts;
    opts.total = 3;
    opts.seed = 1;
    auto out = generate(g, templates, opts);
    REQUIRE(out.ok());
    int from_first = 0, from_second = 0;
    for (const auto& q : out->questions) {
        if (q.template_id == "sxx-authors") ++from_first;
        if (q.template_id == "spx-authors-of") ++from_second;
    }
    CHECK(from_first == 2);
    CHECK(from_second == 1);
}

TEST_CASE("rows with empty gold are redrawn; shortfalls are reported") {
    auto g = bench_graph();
    auto file = load_fixture();

    SUBCASE("unanswerable rows never surface as questions") {
        GenOptions opts;
        opts.per_template = 3;  // selection has 3 papers, one authorless
        opts.seed = 9;
        auto out = generate(g, {file.templates[1]}, opts);
        REQUIRE(out.ok());
        CHECK(out->questions.size() == 2);
        for (const auto& q : out->questions) {
            REQUIRE(q.gold_answers.has_value());
            CHECK_FALSE(q.gold_answers->empty());
            CHECK(q.slots.at("paper title") != "p3");
        }
        REQUIRE(out->skips.size() == 1);
        CHECK(out->skips[0].template_id == "spx-authors-of");
        CHECK(out->skips[0].requested == 3);
        CHECK(out->skips[0].produced == 2);
        CHECK(out->skips[0].reason.find("no names") != std::string::npos);
    }

    SUBCASE("an empty selection skips the whole template") {
        GenOptions opts;
        opts.per_template = 2;
        opts.seed = 9;
        auto out = generate(g, {file.templates[2]}, opts);
        REQUIRE(out.ok());
        CHECK(out->questions.empty());
        REQUIRE(out->skips.size() == 1);
        CHECK(out->skips[0].produced == 0);
        CHECK(out->skips[0].reason == "selection returned no rows");
    }
}

TEST_CASE("generate demands exactly one sizing knob") {
    auto g = bench_graph();
    GenOptions both;
    both.per_template = 1;
    both.total = 1;
    CHECK_FALSE(generate(g, {}, both).ok());
    GenOptions neither;
    CHECK_FALSE(generate(g, {}, neither).ok());
}

TEST_CASE("question records round-trip through their JSON lines") {
    BenchmarkQuestion q;
    q.id = "t-q1";
    q.template_id = "t";
    q.pattern = taxonomy::Pattern::spx;
    q.question = "Who wrote \"Deep Graphs\"?";
    q.paraphrases = {"Name the authors of \"Deep Graphs\"."};
    q.chosen = 0;
    q.slots = {{"paper title", "p1"}};
    q.gold_answers = std::vector<std::string>{"grace park", "henry wu"};
    q.graph_id = "minilib";

    CHECK(to_json_line(q) ==
          R"({"id":"t-q1","template_id":"t","pattern":"sp*",)"
          R"("question":"Who wrote \"Deep Graphs\"?",)"
          R"("paraphrases":["Name the authors of \"Deep Graphs\"."],)"
          R"("chosen":0,"slots":{"paper title":"p1"},)"
          R"("gold_answers":["grace park","henry wu"],"graph_id":"minilib"})");

    auto back = question_from_json(to_json_line(q));
    REQUIRE(back.ok());
    CHECK(back->id == q.id);
    CHECK(back->pattern == q.pattern);
    CHECK(back->question == q.question);
    CHECK(back->paraphrases == q.paraphrases);
    CHECK(back->slots == q.slots);
    CHECK(back->gold_answers == q.gold_answers);
    CHECK_FALSE(back->paraphrase_failed);

    // paraphrase_failed is serialized only when set; gold only when present.
    q.paraphrase_failed = true;
    q.gold_answers.reset();
    auto line = to_json_line(q);
    CHECK(line.find("\"paraphrase_failed\":true") != std::string::npos);
    CHECK(line.find("gold_answers") == std::string::npos);
    auto flagged = question_from_json(line);
    REQUIRE(flagged.ok());
    CHECK(flagged->paraphrase_failed);
    CHECK_FALSE(flagged->gold_answers.has_value());

    CHECK_FALSE(question_from_json("{oops").ok());
    CHECK_FALSE(question_from_json(R"({"id":"x"})").ok());
    auto bad_pattern = question_from_json(
        R"({"id":"x","template_id":"t","pattern":"zigzag","question":"q",)"
        R"("paraphrases":[],"chosen":0,"slots":{},"graph_id":"g"})");
    REQUIRE_FALSE(bad_pattern.ok());
    CHECK(bad_pattern.error().message.find("zigzag") != std::string::npos);
}

TEST_CASE("paraphrasing keeps n distinct rewrites or flags the failure") {
    BenchmarkQuestion q;
    q.id = "t-q1";
    q.question = "Who wrote \"Deep Graphs\"?";

    SUBCASE("numbered distinct variants are accepted") {
        llm::ScriptedBackend backend;
        backend.add("Who wrote",
                    "1. Variant one\n2) Variant two\n3. Variant three\n"
                    "4. Variant four");
        llm::Gateway gateway(backend, "scripted");
        std::mt19937_64 rng(5);
        auto out = paraphrase(q, gateway, rng, 4);
        CHECK_FALSE(out.paraphrase_failed);
        REQUIRE(out.paraphrases.size() == 4);
        CHECK(out.paraphrases[1] == "Variant two");
        CHECK(out.chosen >= 0);
        CHECK(out.chosen < 4);
        CHECK(effective_question(out) ==
              out.paraphrases[static_cast<std::size_t>(out.chosen)]);

        // The draw of the variant is seed-deterministic.
        std::mt19937_64 again(5);
        CHECK(paraphrase(q, gateway, again, 4).chosen == out.chosen);
    }

    SUBCASE("duplicate rewrites do not count toward n") {
        llm::ScriptedBackend backend;
        backend.add("Who wrote",
                    "1. Same thing\n2. same   THING\n3. Other\n4. Another");
        llm::Gateway gateway(backend, "scripted");
        std::mt19937_64 rng(5);
        auto out = paraphrase(q, gateway, rng, 4);
        CHECK(out.paraphrase_failed);
        CHECK(out.paraphrases.empty());
        CHECK(effective_question(out) == q.question);
    }

    SUBCASE("prose without numbering fails soft") {
        llm::ScriptedBackend backend;
        backend.add("Who wrote", "I would rather not rewrite this question.");
        llm::Gateway gateway(backend, "scripted");
        std::mt19937_64 rng(5);
        auto out = paraphrase(q, gateway, rng, 4);
        CHECK(out.paraphrase_failed);
        CHECK(effective_question(out) == q.question);
    }

    SUBCASE("a gateway error fails soft too") {
        llm::ScriptedBackend backend;  // no rules: every call misses
        llm::Gateway gateway(backend, "scripted");
        std::mt19937_64 rng(5);
        auto out = paraphrase(q, gateway, rng, 4);
        CHECK(out.paraphrase_failed);
        CHECK(effective_question(out) == q.question);
    }
}

TEST_CASE("the shipped template corpus loads and covers every pattern") {
    struct Expectation {
        const char* path;
        const char* domain;
        int sxx, spx, sxo, spo, nested;
    };
    // 73 templates across the three domains.
    const Expectation corpus[] = {
        {"templates/academia.json", "academia", 3, 8, 5, 4, 4},
        {"templates/literature.json", "literature", 4, 8, 8, 4, 4},
        {"templates/ecommerce.json", "ecommerce", 2, 8, 3, 4, 4},
    };
    int total = 0;
    for (const auto& want : corpus) {
        CAPTURE(want.path);
        auto file = load_templates_file(want.path);
        REQUIRE_MESSAGE(file.ok(),
                        (file.ok() ? std::string() : file.error().message));
        CHECK(file->domain == want.domain);

        std::map<taxonomy::Pattern, int> seen;
        for (const auto& t : file->templates) {
            seen[t.pattern] += 1;
            // Every relation-chain template carries an answer query; other
            // basic patterns never do.
            if (t.pattern == taxonomy::Pattern::spx) {
                CHECK_MESSAGE(t.answer_text.has_value(), t.id);
            } else if (t.pattern != taxonomy::Pattern::nested) {
                CHECK_MESSAGE(!t.answer_text.has_value(), t.id);
            }
        }
        CHECK(seen[taxonomy::Pattern::sxx] == want.sxx);
        CHECK(seen[taxonomy::Pattern::spx] == want.spx);
        CHECK(seen[taxonomy::Pattern::sxo] == want.sxo);
        CHECK(seen[taxonomy::Pattern::spo] == want.spo);
        CHECK(seen[taxonomy::Pattern::nested] == want.nested);
        total += static_cast<int>(file->templates.size());
    }
    CHECK(total == 73);
}

#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"
#include "polyg/planner/planner.hpp"

using namespace polyg;
using namespace polyg::planner;
using taxonomy::Pattern;

namespace {

graph::PropertyGraph newton_graph() {
    std::istringstream nodes(R"({"id": "ug", "type": "theory", "name": "Universal Gravitation"}
{"id": "in", "type": "scientist", "name": "Isaac Newton", "attrs": {"born": 1643}}
{"id": "y1643", "type": "year", "name": "1643"}
)");
    std::istringstream edges(R"({"src": "ug", "rel": "developer", "dst": "in"}
{"src": "in", "rel": "born in", "dst": "y1643"}
)");
    auto g = graph::load_graph(nodes, edges);
    REQUIRE(g.ok());
    return graph::materialize_inverses(std::move(*g));
}

graph::PropertyGraph ambiguous_graph() {
    std::istringstream nodes(R"({"id": "a1", "type": "theory", "name": "Universal Gravitation"}
{"id": "a2", "type": "theory", "name": "Gravitation"}
{"id": "b2", "type": "person", "name": "Ada"}
{"id": "b1", "type": "person", "name": "Ada"}
)");
    std::istringstream edges("");
    auto g = graph::load_graph(nodes, edges);
    REQUIRE(g.ok());
    return std::move(*g);
}

std::vector<std::string> trace_stages(const QueryPlan& plan) {
    std::vector<std::string> out;
    for (const auto& r : plan.trace) out.push_back(r.stage);
    return out;
}

}  // namespace

TEST_CASE("categorization labels parse at the earliest position") {
    auto cat = parse_categorization("basic s**");
    REQUIRE(cat.has_value());
    CHECK_FALSE(cat->nested);
    CHECK(cat->pattern == Pattern::sxx);

    cat = parse_categorization("  The answer is: basic sp*  ");
    REQUIRE(cat.has_value());
    CHECK(cat->pattern == Pattern::spx);

    cat = parse_categorization("NESTED.");
    REQUIRE(cat.has_value());
    CHECK(cat->nested);

    cat = parse_categorization("This looks nested to me, though maybe spo");
    REQUIRE(cat.has_value());
    CHECK(cat->nested);

    cat = parse_categorization("spo, though arguably nested");
    REQUIRE(cat.has_value());
    CHECK_FALSE(cat->nested);
    CHECK(cat->pattern == Pattern::spo);
}

TEST_CASE("categorization rejects glued or missing labels") {
    CHECK_FALSE(parse_categorization("sponsor spoke first").has_value());
    CHECK_FALSE(parse_categorization("s***").has_value());
    CHECK_FALSE(parse_categorization("").has_value());
    CHECK_FALSE(parse_categorization("no label here").has_value());
}

TEST_CASE("plan lines parse pattern and description around the bar") {
    auto plan = parse_plan(
        "Here is the plan:\n"
        "step 1: sp* | find the developer of universal gravitation\n"
        "step 2: s*o |  connect the developer to the theory \n"
        "Good luck.\n");
    REQUIRE(plan.has_value());
    REQUIRE(plan->size() == 2);
    CHECK((*plan)[0].first == Pattern::spx);
    CHECK((*plan)[0].second == "find the developer of universal gravitation");
    CHECK((*plan)[1].first == Pattern::sxo);
    CHECK((*plan)[1].second == "connect the developer to the theory");
}

TEST_CASE("plans with unknown patterns or empty descriptions are rejected") {
    CHECK_FALSE(parse_plan("step 1: ??? | find x").has_value());
    CHECK_FALSE(parse_plan("step 1: sp* |   ").has_value());
    CHECK_FALSE(parse_plan("no bars at all").has_value());
    CHECK_FALSE(parse_plan("").has_value());

    auto upper = parse_plan("Step 1: SP* | Find X");
    REQUIRE(upper.has_value());
    CHECK((*upper)[0].first == Pattern::spx);
    CHECK((*upper)[0].second == "Find X");
}

TEST_CASE("query text extraction handles fences, tags and prose") {
    CHECK(extract_query_text("```cypher\nMATCH (a)-[p]->(b) RETURN b\n```") ==
          "MATCH (a)-[p]->(b) RETURN b");
    CHECK(extract_query_text("```\nMATCH (a)-[p]->(b) RETURN b\n```") ==
          "MATCH (a)-[p]->(b) RETURN b");
    CHECK(extract_query_text(
              "Sure, here it is:\n\nMATCH (a)-[p]->(b)\nRETURN b") ==
          "MATCH (a)-[p]->(b)\nRETURN b");
    CHECK(extract_query_text(
              "```\nMATCH (x {id: 'a'})-[:r]->(y) RETURN y\n```\nHope that "
              "helps!") == "MATCH (x {id: 'a'})-[:r]->(y) RETURN y");
    // A glued "match" is not the keyword.
    CHECK(extract_query_text("Rematch the MATCH (a)-[p]->(b) RETURN b") ==
          "MATCH (a)-[p]->(b) RETURN b");
    CHECK(extract_query_text("  no query here  ") == "no query here");
}

TEST_CASE("anchors resolve longest matches in question order") {
    auto g = ambiguous_graph();

    auto anchors = resolve_anchors(g, "Ada studied universal gravitation.");
    REQUIRE(anchors.size() == 2);
    CHECK(anchors[0].name == "ada");
    CHECK(anchors[0].ids == std::vector<std::string>{"b1", "b2"});
    CHECK(anchors[1].name == "universal gravitation");
    CHECK(anchors[1].ids == std::vector<std::string>{"a1"});

    // The longer name wins over the contained one.
    anchors = resolve_anchors(g, "Tell me about universal gravitation.");
    REQUIRE(anchors.size() == 1);
    CHECK(anchors[0].name == "universal gravitation");

    anchors = resolve_anchors(g, "Is gravitation a theory?");
    REQUIRE(anchors.size() == 1);
    CHECK(anchors[0].name == "gravitation");
    CHECK(anchors[0].ids == std::vector<std::string>{"a2"});

    anchors = resolve_anchors(g, "Ada met Ada.");
    CHECK(anchors.size() == 2);

    CHECK(resolve_anchors(g, "nothing matches here").empty());
    CHECK(resolve_anchors(g, "").empty());
}

TEST_CASE("neighbor expansion answers without any generation call") {
    auto g = newton_graph();
    const std::string q = "Tell me about Isaac Newton.";

    llm::ScriptedBackend backend;
    backend.add("Answer the original question.",
                "Isaac Newton is a scientist born in 1643.");
    backend.add(q, "basic s**");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    CHECK(rec.answer == "Isaac Newton is a scientist born in 1643.");
    REQUIRE(rec.plan.steps.size() == 1);
    const auto& step = rec.plan.steps[0];
    CHECK(step.status == StepStatus::succeeded);
    REQUIRE(step.attempts.size() == 1);
    CHECK(step.attempts[0].outcome == "ok");
    CHECK(step.attempts[0].query_text ==
          "MATCH (s {id: 'in'})-[p]->(o) RETURN p, o");

    // No model call for generation: stage accounting must not know it.
    auto usage = gw.usage_by_stage();
    CHECK(usage.count(llm::Stage::generate) == 0);
    CHECK(usage.at(llm::Stage::categorize).calls == 1);
    CHECK(usage.at(llm::Stage::summarize).calls == 1);
    CHECK(backend.unmatched_calls() == 0);

    auto stages = trace_stages(rec.plan);
    CHECK(stages == std::vector<std::string>{"categorize", "generate",
                                             "execute", "summarize"});
    // The template record is not an LLM event.
    CHECK(rec.plan.trace[1].fingerprint.empty());
    CHECK_FALSE(rec.plan.trace[0].fingerprint.empty());
    CHECK(rec.plan.trace[2].result_digest.size() == 16);
}

TEST_CASE("ambiguous anchors default to the lexicographically first id") {
    auto g = ambiguous_graph();
    const std::string q = "Tell me about Ada.";

    llm::ScriptedBackend backend;
    backend.add("Answer the original question.", "Ada is a person.");
    backend.add(q, "basic s**");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    const auto& step = rec.plan.steps[0];
    CHECK(step.attempts[0].query_text ==
          "MATCH (s {id: 'b1'})-[p]->(o) RETURN p, o");
    // No outgoing edges: an empty expansion is still a success.
    CHECK(step.status == StepStatus::succeeded);
    CHECK(step.attempts.size() == 1);
    CHECK(step.bundle_text == "no facts retrieved\n");
    CHECK(step.answer_text.empty());
}

TEST_CASE("top-k connection questions use the fixed path template") {
    auto g = newton_graph();
    const std::string q = "How is universal gravitation connected to 1643?";

    llm::ScriptedBackend backend;
    backend.add("Answer the original question.",
                "Through its developer Isaac Newton, born in 1643.");
    backend.add(q, "basic s*o");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    const auto& step = rec.plan.steps[0];
    CHECK(step.status == StepStatus::succeeded);
    REQUIRE(step.attempts.size() == 1);
    CHECK(step.attempts[0].query_text ==
          "MATCH P = SHORTEST 10 (s {id: 'ug'})-[*]->(o {id: 'y1643'}) "
          "RETURN P");
    CHECK(step.answer_text ==
          "Universal Gravitation -(developer)-> Isaac Newton -(born in)-> "
          "1643");
    CHECK(gw.usage_by_stage().count(llm::Stage::generate) == 0);
}

TEST_CASE("relation-chain generation repaired on the second attempt") {
    auto g = newton_graph();
    const std::string q = "Who is the developer of universal gravitation?";

    llm::ScriptedBackend backend;
    backend.add("Corrected query:",
                "MATCH (s {id: 'ug'})-[:developer]->(o) RETURN o");
    backend.add("Cypher query:",
                "MATCH (s {id: 'ug'})-[:made_by]->(o) RETURN o");
    backend.add("Answer the original question.", "Isaac Newton.");
    backend.add(q, "basic sp*");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    CHECK(rec.answer == "Isaac Newton.");
    const auto& step = rec.plan.steps[0];
    CHECK(step.status == StepStatus::succeeded);
    REQUIRE(step.attempts.size() == 2);
    CHECK(step.attempts[0].outcome.find("schema validation") !=
          std::string::npos);
    CHECK(step.attempts[0].outcome.find("made_by") != std::string::npos);
    CHECK(step.attempts[1].outcome == "ok");
    CHECK(step.answer_text == "Isaac Newton");

    auto usage = gw.usage_by_stage();
    CHECK(usage.at(llm::Stage::generate).calls == 1);
    CHECK(usage.at(llm::Stage::correct).calls == 1);

    // The rejected proposal never reached the executor.
    auto stages = trace_stages(rec.plan);
    CHECK(stages == std::vector<std::string>{"categorize", "generate",
                                             "correct", "execute",
                                             "summarize"});
}

TEST_CASE("a step that never repairs stops after one plus max_retries") {
    auto g = newton_graph();
    const std::string q = "Who is the developer of universal gravitation?";

    llm::ScriptedBackend backend;
    backend.add("Corrected query:",
                "MATCH (s {id: 'ug'})-[:made_by]->(o) RETURN o");
    backend.add("Cypher query:",
                "MATCH (s {id: 'ug'})-[:made_by]->(o) RETURN o");
    backend.add("Answer the original question.",
                "The graph does not contain that information.");
    backend.add(q, "basic sp*");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);  // the pipeline completes; the step is what failed
    const auto& step = rec.plan.steps[0];
    CHECK(step.status == StepStatus::failed_exhausted);
    CHECK(step.attempts.size() == 4);  // 1 + default max_retries of 3
    for (const auto& a : step.attempts)
        CHECK(a.outcome.find("schema validation") != std::string::npos);
    CHECK(step.failure.find("schema validation") != std::string::npos);
    CHECK(gw.usage_by_stage().at(llm::Stage::correct).calls == 3);
    CHECK(rec.answer == "The graph does not contain that information.");
}

TEST_CASE("empty results from model-written queries retry until exhausted") {
    auto g = newton_graph();
    const std::string q = "Who is the developer of Isaac Newton?";

    llm::ScriptedBackend backend;
    backend.add("Corrected query:",
                "MATCH (s {id: 'in'})-[:developer]->(o) RETURN o");
    backend.add("Cypher query:",
                "MATCH (s {id: 'in'})-[:developer]->(o) RETURN o");
    backend.add("Answer the original question.", "Nothing found.");
    backend.add(q, "basic sp*");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    const auto& step = rec.plan.steps[0];
    CHECK(step.status == StepStatus::failed_exhausted);
    CHECK(step.attempts.size() == 4);
    for (const auto& a : step.attempts)
        CHECK(a.outcome.find("no rows") != std::string::npos);
    // Every attempt executed, so every attempt left a digest.
    int executes = 0;
    for (const auto& r : rec.plan.trace)
        if (r.stage == "execute") ++executes;
    CHECK(executes == 4);
}

TEST_CASE("shape checks reject the wrong traversal form for the pattern") {
    auto g = newton_graph();

    SUBCASE("relation chains must not use SHORTEST") {
        const std::string q = "Which relation chain leads from universal "
                              "gravitation to its developer?";
        llm::ScriptedBackend backend;
        backend.add("Corrected query:",
                    "MATCH (s {id: 'ug'})-[:developer]->(o) RETURN o");
        backend.add("Cypher query:",
                    "MATCH P = SHORTEST 5 (s {id: 'ug'})-[*]->(o {id: 'in'}) "
                    "RETURN P");
        backend.add("Answer the original question.", "developer");
        backend.add(q, "basic sp*");
        llm::Gateway gw(backend, "test-model");
        Planner planner(g, gw);

        auto rec = planner.answer(q);
        REQUIRE(rec.ok);
        const auto& step = rec.plan.steps[0];
        REQUIRE(step.attempts.size() == 2);
        CHECK(step.attempts[0].outcome.find("shape") != std::string::npos);
        CHECK(step.status == StepStatus::succeeded);
    }

    SUBCASE("constrained path questions must use SHORTEST") {
        const std::string q =
            "How is universal gravitation linked to 1643 by development and "
            "birth?";
        llm::ScriptedBackend backend;
        backend.add("Corrected query:",
                    "MATCH P = SHORTEST 2 (s {id: 'ug'})-[:developer|`born "
                    "in`*]->(o {id: 'y1643'}) RETURN P");
        backend.add("Cypher query:",
                    "MATCH (s {id: 'ug'})-[:developer]->(o {id: 'y1643'}) "
                    "RETURN o");
        backend.add("Answer the original question.",
                    "Via Isaac Newton's birth year.");
        backend.add(q, "basic spo");
        llm::Gateway gw(backend, "test-model");
        Planner planner(g, gw);

        auto rec = planner.answer(q);
        REQUIRE(rec.ok);
        const auto& step = rec.plan.steps[0];
        REQUIRE(step.attempts.size() == 2);
        CHECK(step.attempts[0].outcome.find("SHORTEST") != std::string::npos);
        CHECK(step.status == StepStatus::succeeded);
        CHECK(step.answer_text.find("Isaac Newton") != std::string::npos);
    }
}

TEST_CASE("an unparseable categorization is reprompted once") {
    auto g = newton_graph();
    const std::string q = "Tell me about Isaac Newton.";

    SUBCASE("the reprompt can still succeed") {
        llm::ScriptedBackend backend;
        backend.add("Answer the original question.", "A scientist.");
        backend.add("Reply with exactly one line", "basic s**");
        backend.add(q, "hmm, let me think");
        llm::Gateway gw(backend, "test-model");
        Planner planner(g, gw);

        auto rec = planner.answer(q);
        REQUIRE(rec.ok);
        CHECK(gw.usage_by_stage().at(llm::Stage::categorize).calls == 2);
        int categorizes = 0;
        for (const auto& r : rec.plan.trace)
            if (r.stage == "categorize") ++categorizes;
        CHECK(categorizes == 2);
    }

    SUBCASE("a second failure ends the pipeline") {
        llm::ScriptedBackend backend;
        backend.add("Reply with exactly one line", "still no idea");
        backend.add(q, "hmm, let me think");
        llm::Gateway gw(backend, "test-model");
        Planner planner(g, gw);

        auto rec = planner.answer(q);
        CHECK_FALSE(rec.ok);
        CHECK(rec.failure_stage == "categorize");
        CHECK(rec.answer.find("classification failed") != std::string::npos);
    }
}

TEST_CASE("unresolvable entity mentions fail before any generation") {
    auto g = newton_graph();
    const std::string q = "Who wrote The Principia?";

    llm::ScriptedBackend backend;
    backend.add(q, "basic sp*");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    CHECK_FALSE(rec.ok);
    CHECK(rec.failure_stage == "resolution");
    CHECK(rec.answer.find("entity resolution failed") != std::string::npos);
    CHECK(rec.answer.find("need 1") != std::string::npos);
    CHECK(backend.unmatched_calls() == 0);
}

TEST_CASE("a backend failure surfaces as a gateway failure with its trace") {
    auto g = newton_graph();
    const std::string q = "Where was the developer of universal gravitation "
                          "born?";

    llm::ScriptedBackend backend;
    backend.add(q, "nested");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    CHECK_FALSE(rec.ok);
    CHECK(rec.failure_stage == "gateway");
    CHECK(rec.answer.find("scripted backend: no rule") != std::string::npos);
    CHECK(backend.unmatched_calls() == 1);
    // First decompose reply reuses the sticky "nested" rule and fails to
    // parse; the reprompt has no rule and is the call that fails.
    REQUIRE(rec.plan.trace.size() == 3);
    CHECK(rec.plan.trace[1].stage == "decompose");
    CHECK(rec.plan.trace[2].stage == "decompose");
    CHECK(rec.plan.trace[2].usage.prompt_tokens == 0);
    CHECK_FALSE(rec.plan.trace[2].fingerprint.empty());
}

namespace {

// Nested two-step fixture shared by the flow and determinism tests.
AnswerRecord run_nested(const graph::PropertyGraph& g) {
    const std::string q =
        "Where was the developer of universal gravitation born?";
    llm::ScriptedBackend backend;
    backend.add("Concrete question:", "Where was Isaac Newton born?");
    backend.add("Cypher query:",
                "MATCH (s {id: 'ug'})-[:developer]->(o) RETURN o");
    backend.add("Cypher query:",
                "MATCH (s {id: 'in'})-[:`born in`]->(o) RETURN o");
    backend.add("Answer the original question.",
                "Isaac Newton was born in 1643.");
    backend.add(q, "nested");
    backend.add(q,
                "step 1: sp* | find the developer of universal gravitation\n"
                "step 2: sp* | find the year the developer was born in");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);
    auto rec = planner.answer(q);
    REQUIRE(backend.unmatched_calls() == 0);
    return rec;
}

}  // namespace

TEST_CASE("nested questions thread prior answers through instantiation") {
    auto g = newton_graph();
    auto rec = run_nested(g);

    REQUIRE(rec.ok);
    CHECK(rec.answer == "Isaac Newton was born in 1643.");
    REQUIRE(rec.plan.steps.size() == 2);
    CHECK(rec.plan.steps[0].status == StepStatus::succeeded);
    CHECK(rec.plan.steps[0].answer_text == "Isaac Newton");
    CHECK(rec.plan.steps[1].status == StepStatus::succeeded);
    CHECK(*rec.plan.steps[1].instantiated_question ==
          "Where was Isaac Newton born?");
    CHECK(rec.plan.steps[1].answer_text == "1643");

    auto stages = trace_stages(rec.plan);
    CHECK(stages == std::vector<std::string>{
                        "categorize", "decompose", "generate", "execute",
                        "instantiate", "generate", "execute", "summarize"});
}

TEST_CASE("replaying the same script reproduces the trace byte for byte") {
    auto g = newton_graph();
    auto first = run_nested(g);
    auto second = run_nested(g);

    REQUIRE(first.ok);
    REQUIRE(second.ok);
    CHECK(first.answer == second.answer);
    CHECK(trace_to_jsonl(first.plan) == trace_to_jsonl(second.plan));
    CHECK_FALSE(trace_to_jsonl(first.plan).empty());
}

TEST_CASE("a failed step skips its dependents but still summarizes") {
    auto g = newton_graph();
    const std::string q =
        "Where was the developer of universal gravitation born?";

    llm::ScriptedBackend backend;
    backend.add("Corrected query:",
                "MATCH (s {id: 'ug'})-[:made_by]->(o) RETURN o");
    backend.add("Cypher query:",
                "MATCH (s {id: 'ug'})-[:made_by]->(o) RETURN o");
    backend.add("Answer the original question.",
                "The facts needed are missing from the graph.");
    backend.add(q, "nested");
    backend.add(q,
                "step 1: sp* | find the developer of universal gravitation\n"
                "step 2: sp* | find the year the developer was born in");
    llm::Gateway gw(backend, "test-model");
    Planner planner(g, gw);

    auto rec = planner.answer(q);
    REQUIRE(rec.ok);
    CHECK(rec.answer == "The facts needed are missing from the graph.");
    REQUIRE(rec.plan.steps.size() == 2);
    CHECK(rec.plan.steps[0].status == StepStatus::failed_exhausted);
    CHECK(rec.plan.steps[0].attempts.size() == 4);
    CHECK(rec.plan.steps[1].status == StepStatus::failed_exhausted);
    CHECK(rec.plan.steps[1].failure.rfind("skipped:", 0) == 0);
    CHECK(rec.plan.steps[1].attempts.empty());
    // The skipped step never reached the model.
    auto usage = gw.usage_by_stage();
    CHECK(usage.count(llm::Stage::instantiate) == 0);
}

TEST_CASE("trace records serialize with a stable field order") {
    TraceRecord rec;
    rec.stage = "generate";
    rec.step = 1;
    rec.fingerprint = "deadbeefdeadbeef";
    rec.query = "MATCH (a)-[p]->(b) RETURN b";
    rec.usage = {12, 7};
    CHECK(to_json_line(rec) ==
          R"({"stage":"generate","step":1,"fingerprint":"deadbeefdeadbeef",)"
          R"("query":"MATCH (a)-[p]->(b) RETURN b","result_digest":"",)"
          R"("usage":{"prompt_tokens":12,"completion_tokens":7}})");
}

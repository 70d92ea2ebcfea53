#include "polyg/planner/prompts.hpp"

#include <sstream>

namespace polyg::planner::prompts {

const char* const kVersion = "v1";

namespace {

using llm::Message;
using taxonomy::Pattern;

const char* kPatternKey =
    "Question patterns (a fact is a <subject, predicate, object> triple):\n"
    "  s**    one known entity; ask for everything directly connected to it\n"
    "  sp*    one known entity and a named relation chain; ask what the chain "
    "reaches\n"
    "  s*o    two known entities; ask how they are connected\n"
    "  spo    two known entities and named relations; ask how they are "
    "connected through those relations\n"
    "  nested the anchor entity of the question is itself the answer of an "
    "inner question\n";

std::string render_steps(const std::vector<context::StepRecord>& priors) {
    std::ostringstream out;
    for (std::size_t i = 0; i < priors.size(); ++i) {
        out << "Step " << (i + 1) << ": " << priors[i].sub_question << "\n";
        out << "Answer: "
            << (priors[i].answer.empty() ? "no answer found" : priors[i].answer)
            << "\n";
    }
    return out.str();
}

}  // namespace

std::string render_schema(const graph::GraphSchema& schema) {
    std::ostringstream out;
    out << "Entity types:\n";
    for (const auto& [type, props] : schema.entity_types) {
        out << "  " << type << ":";
        bool first = true;
        for (const auto& p : props) {
            out << (first ? " " : ", ") << p;
            first = false;
        }
        out << "\n";
    }
    out << "Relations:\n";
    for (const auto& [src, rel, dst] : schema.relation_types) {
        out << "  (" << src << ")-[" << rel << "]->(" << dst << ")\n";
    }
    if (!schema.inverse_map.empty()) {
        out << "Inverse relation pairs:\n";
        for (const auto& [a, b] : schema.inverse_map) {
            if (a <= b) out << "  " << a << " <-> " << b << "\n";
        }
    }
    return out.str();
}

std::vector<Message> categorize(const std::string& question) {
    std::string system = std::string(
        "You classify knowledge-graph questions by pattern.\n\n") +
        kPatternKey +
        "\nExamples:\n"
        "  \"Who is Marie Curie?\" -> basic s**\n"
        "  \"What prizes has Marie Curie won?\" -> basic sp*\n"
        "  \"What books has the author 'J. Doe' published?\" -> basic sp*\n"
        "  \"How are Marie Curie and Albert Einstein connected?\" -> basic s*o\n"
        "  \"Did Marie Curie and Pierre Curie work in the same field?\" -> "
        "basic spo\n"
        "  \"Tell me about the scientist who discovered radium.\" -> nested\n"
        "  \"What did the collaborators of the author of 'Dune' publish?\" -> "
        "nested\n"
        "\nA question is nested when its anchor entity must first be found by "
        "answering an inner question. Reply with exactly one line: either "
        "\"basic <pattern>\" or \"nested\".";
    return {{"system", system}, {"user", question}};
}

std::vector<Message> reprompt(std::vector<Message> messages,
                              const std::string& reply,
                              const std::string& reminder) {
    messages.push_back({"assistant", reply});
    messages.push_back({"user", reminder});
    return messages;
}

std::vector<Message> decompose(const std::string& question,
                               const std::string& schema_text) {
    std::string system = std::string(
        "You decompose a nested knowledge-graph question into a query plan "
        "of basic steps.\n\n") +
        kPatternKey +
        "\nRules:\n"
        "- Every step must be one of the four basic patterns (never nested).\n"
        "- Inner lookups are sp* steps; the final step answers the original "
        "question.\n"
        "- A later step may refer to earlier results descriptively, e.g. "
        "\"find the relations between the two scientists identified in the "
        "previous two steps\".\n"
        "\nExample:\n"
        "Question: How are the developers of universal gravitation and the "
        "theory of relativity related to each other?\n"
        "Plan:\n"
        "step 1: sp* | find the developer of universal gravitation\n"
        "step 2: sp* | find the developer of the theory of relativity\n"
        "step 3: s*o | find the relations between the two scientists "
        "identified in the previous two steps\n"
        "\nGraph schema:\n" + schema_text +
        "\nReply with one line per step, exactly in the form\n"
        "step <n>: <pattern> | <description>";
    return {{"system", system}, {"user", question}};
}

std::vector<Message> instantiate(const std::string& original_question,
                                 const std::vector<context::StepRecord>& priors,
                                 const std::string& step_description,
                                 const std::string& candidates) {
    std::string system =
        "You turn a descriptive query-plan step into one concrete question, "
        "substituting the entities found in earlier steps. Reply with the "
        "concrete question only, on a single line.";
    std::ostringstream user;
    user << "Original question: " << original_question << "\n\n";
    user << "Finished steps:\n" << render_steps(priors) << "\n";
    if (!candidates.empty()) {
        user << "Graph entity candidates:\n" << candidates << "\n";
    }
    user << "Current step: " << step_description << "\n";
    user << "Concrete question:";
    return {{"system", system}, {"user", user.str()}};
}

std::vector<Message> generate_spx(const std::string& schema_text,
                                  const std::string& question,
                                  const std::string& anchors_text, int hop_cap) {
    std::ostringstream system;
    system
        << "You write one Cypher query that follows a concrete relation "
           "chain (a meta-path) from a known entity.\n\n"
        << "Form: MATCH (s {id: '...'})-[:rel1]->(v1)-[:rel2]->(v2) RETURN "
           "v2\n\n"
        << "Rules:\n"
        << "- Anchor the start node with its entity id from the list below.\n"
        << "- Use only relation types from the schema, chained with "
           "single-hop edges (at most " << hop_cap << " hops); no SHORTEST, "
           "no variable-length [*] edges.\n"
        << "- Quote relation names containing spaces in backticks.\n"
        << "- RETURN the variables holding the answer entities; use DISTINCT "
           "when duplicates are likely.\n"
        << "- Reply with the query only.\n\n"
        << "Example:\n"
        << "Question: Who are the collaborators of the author 'A. Example' "
           "(id a17)?\n"
        << "MATCH (s {id: 'a17'})-[:paper]->(p)-[:author]->(c) WHERE c.id <> "
           "'a17' RETURN DISTINCT c\n\n"
        << "Graph schema:\n" << schema_text;
    std::ostringstream user;
    user << "Question: " << question << "\n";
    user << "Resolved entities:\n" << anchors_text;
    user << "Cypher query:";
    return {{"system", system.str()}, {"user", user.str()}};
}

std::vector<Message> generate_spo(const std::string& schema_text,
                                  const std::string& question,
                                  const std::string& anchors_text, int k,
                                  int hop_cap) {
    std::ostringstream system;
    system
        << "You write one Cypher query that checks how two known entities "
           "are connected through specific relations.\n\n"
        << "Form: MATCH P = SHORTEST " << k
        << " (s {id: '...'})-[*]->(o {id: '...'}) RETURN P\n\n"
        << "Rules:\n"
        << "- Anchor both endpoints with their entity ids from the list "
           "below.\n"
        << "- Keep the SHORTEST clause; restrict relations either with an "
           "alternation such as -[:a|b*]-> or with a WHERE clause over the "
           "path, preferring short paths (at most " << hop_cap << " hops) "
           "when the question is ambiguous.\n"
        << "- Use only relation types from the schema; quote names with "
           "spaces in backticks.\n"
        << "- Reply with the query only.\n\n"
        << "Example:\n"
        << "Question: Have 'A. Example' (id a17) and 'B. Sample' (id a9) "
           "published in the same venues?\n"
        << "MATCH P = SHORTEST " << k
        << " (s {id: 'a17'})-[:paper|venue*]->(o {id: 'a9'}) RETURN P\n\n"
        << "Graph schema:\n" << schema_text;
    std::ostringstream user;
    user << "Question: " << question << "\n";
    user << "Resolved entities:\n" << anchors_text;
    user << "Cypher query:";
    return {{"system", system.str()}, {"user", user.str()}};
}

std::vector<Message> correct(const std::string& schema_text,
                             const std::string& question,
                             taxonomy::Pattern pattern,
                             const std::vector<Attempt>& attempts) {
    std::ostringstream system;
    system << "You repair a Cypher query that failed. Fix the cause named in "
              "the error, keep the query shape required for its pattern ("
           << taxonomy::to_string(pattern)
           << "), and reply with the corrected query only.\n\nGraph schema:\n"
           << schema_text;
    std::ostringstream user;
    user << "Question: " << question << "\n\n";
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        user << "Attempt " << (i + 1) << ": " << attempts[i].query_text << "\n";
        user << "Error: " << attempts[i].outcome << "\n\n";
    }
    user << "Corrected query:";
    return {{"system", system.str()}, {"user", user.str()}};
}

std::vector<Message> paraphrase(const std::string& question, int n) {
    std::ostringstream system;
    system << "You paraphrase a question " << n
           << " different ways without changing its meaning or the entities "
              "it names. Keep every quoted name exactly as written. Reply "
              "with one paraphrase per line, numbered 1-" << n << ".";
    return {{"system", system.str()}, {"user", question}};
}

}  // namespace polyg::planner::prompts

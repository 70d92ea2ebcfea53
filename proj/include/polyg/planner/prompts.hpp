#pragma once

#include <string>
#include <vector>

#include "polyg/context/builder.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"
#include "polyg/taxonomy/taxonomy.hpp"

namespace polyg::planner {

// One proposed query and what became of it. Parse and validation failures
// count as attempts just like execution failures; `outcome` is "ok" or the
// error text that made the attempt fail.
struct Attempt {
    std::string query_text;
    std::string outcome;
};

namespace prompts {

// Bumped whenever any prompt text changes, since recorded cassettes are
// keyed by prompt content.
extern const char* const kVersion;

// Deterministic plain-text schema rendering shared by all prompts.
std::string render_schema(const graph::GraphSchema& schema);

std::vector<llm::Message> categorize(const std::string& question);

// Reprompt after an unparseable reply: the failed exchange plus a stricter
// format reminder.
std::vector<llm::Message> reprompt(std::vector<llm::Message> messages,
                                   const std::string& reply,
                                   const std::string& reminder);

std::vector<llm::Message> decompose(const std::string& question,
                                    const std::string& schema_text);

std::vector<llm::Message> instantiate(
    const std::string& original_question,
    const std::vector<context::StepRecord>& priors,
    const std::string& step_description, const std::string& candidates);

std::vector<llm::Message> generate_spx(const std::string& schema_text,
                                       const std::string& question,
                                       const std::string& anchors_text,
                                       int hop_cap);

std::vector<llm::Message> generate_spo(const std::string& schema_text,
                                       const std::string& question,
                                       const std::string& anchors_text, int k,
                                       int hop_cap);

std::vector<llm::Message> correct(const std::string& schema_text,
                                  const std::string& question,
                                  taxonomy::Pattern pattern,
                                  const std::vector<Attempt>& attempts);

std::vector<llm::Message> paraphrase(const std::string& question, int n);

}  // namespace prompts
}  // namespace polyg::planner

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polyg/context/builder.hpp"
#include "polyg/cypher/ast.hpp"
#include "polyg/exec/executor.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"
#include "polyg/planner/prompts.hpp"
#include "polyg/taxonomy/taxonomy.hpp"

namespace polyg::planner {

struct CorrectionPolicy {
    int max_retries = 3;
    bool retry_on_empty = true;
};

struct PlannerConfig {
    int shortest_k = 10;
    exec::ExecLimits limits;
    CorrectionPolicy policy;
    std::size_t context_budget = context::kDefaultBudget;
};

enum class StepStatus { pending, succeeded, failed_exhausted };

const char* to_string(StepStatus s);

struct PlanStep {
    std::string description;
    taxonomy::Pattern pattern = taxonomy::Pattern::sxx;
    std::optional<std::string> instantiated_question;
    // The accepted query; attempts retain every proposal and its outcome.
    std::optional<cypher::CypherQuery> query;
    std::vector<Attempt> attempts;
    std::optional<exec::ResultTable> result;
    StepStatus status = StepStatus::pending;
    // Failure outside the attempt loop: skipped step, entity resolution,
    // instantiation with empty priors, backend trouble.
    std::string failure;
    std::string answer_text;  // compact answer, empty when none
    std::string bundle_text;  // rendered facts for the step
};

// One trace event: an LLM call (fingerprint + usage) or a query execution
// (canonical text + result digest). Serialized one JSON object per line;
// replays of the same cassette reproduce the file byte for byte.
struct TraceRecord {
    std::string stage;
    int step = -1;  // -1 for plan-level events
    std::string fingerprint;
    std::string query;
    std::string result_digest;
    llm::Usage usage;
};

std::string to_json_line(const TraceRecord& r);

struct QueryPlan {
    std::string question;
    std::vector<PlanStep> steps;
    std::optional<std::string> final_answer;
    std::vector<TraceRecord> trace;
};

std::string trace_to_jsonl(const QueryPlan& plan);

struct Categorization {
    bool nested = false;
    taxonomy::Pattern pattern = taxonomy::Pattern::sxx;  // set when !nested
};

// A graph entity mention found in a question: the normalized name and the
// candidate entity ids carrying it (id order; first is the default pick).
struct Anchor {
    std::string name;
    std::vector<std::string> ids;
};

// Finds entity names from the graph's name index in the question, matching
// whole token sequences. Longer matches win over shorter overlapping ones;
// anchors come back in question order.
std::vector<Anchor> resolve_anchors(const graph::PropertyGraph& g,
                                    const std::string& question);

// Model-output parsing, exposed for tests. Both return nullopt when the
// text holds no recognizable answer (the caller reprompts once).
std::optional<Categorization> parse_categorization(const std::string& text);
std::optional<std::vector<std::pair<taxonomy::Pattern, std::string>>>
parse_plan(const std::string& text);

// Pulls the query out of a reply: fenced block when present, otherwise from
// the first MATCH keyword onward.
std::string extract_query_text(const std::string& text);

// A proposed query for one attempt. `text` is canonical once parsed,
// otherwise the raw reply; `error` explains a rejected proposal.
struct Proposal {
    std::string text;
    std::optional<cypher::CypherQuery> query;
    std::string error;
};

struct AnswerRecord {
    std::string answer;
    bool ok = false;
    // Failed pipeline stage: "categorize", "decompose", "resolution",
    // "gateway". Step-level exhaustion is not a pipeline failure; the
    // summary then reports the missing facts.
    std::string failure_stage;
    QueryPlan plan;
};

// The five-stage pipeline: categorize, decompose, instantiate, generate,
// execute with self-correction, then a final summary over all steps.
//
// s** and s*o steps populate fixed query templates and never call the
// model for generation; sp* and spo generation is model-written, then
// parsed, schema-validated and shape-checked before execution. Failing
// attempts (parse, validation, execution error, or empty result when the
// policy retries on empty) are fed back for correction until
// 1 + max_retries attempts are spent. Template-generated steps do not
// retry: their queries cannot be corrected, and an empty expansion is an
// honest answer.
class Planner {
public:
    Planner(const graph::PropertyGraph& g, llm::Gateway& gateway,
            PlannerConfig config = {});

    Result<Categorization> categorize(const std::string& question,
                                      QueryPlan& plan);

    // Fills plan.steps: a single passthrough step for basic questions, the
    // model-written plan for nested ones.
    Result<Ok> decompose(const std::string& question, const Categorization& cat,
                         QueryPlan& plan);

    // Concrete sub-question for step `index`. The first step passes its
    // description through; later steps substitute prior answers via the
    // model, with ambiguous entity mentions shown as candidate lists.
    Result<std::string> instantiate_step(QueryPlan& plan, std::size_t index);

    // First query proposal for the step. Gateway trouble is the only hard
    // error; rejected model output comes back as a Proposal with `error`.
    Result<Proposal> generate_query(QueryPlan& plan, std::size_t index,
                                    const std::vector<Anchor>& anchors);

    // Runs the attempt loop on the step, recording every proposal. Returns
    // an error only when the backend fails mid-correction.
    Result<Ok> execute_with_correction(QueryPlan& plan, std::size_t index,
                                       Proposal first);

    // End to end. Never throws; unrecoverable stage failures produce a
    // failure record with the partial plan and trace attached.
    AnswerRecord answer(const std::string& question);

    const PlannerConfig& config() const { return config_; }
    const std::string& schema_text() const { return schema_text_; }

private:
    Result<std::string> call(QueryPlan& plan, llm::Stage stage,
                             const std::vector<llm::Message>& messages,
                             int step_index);
    Proposal propose_from_reply(const std::string& reply,
                                taxonomy::Pattern pattern);
    void finish_step(QueryPlan& plan, std::size_t index);
    std::string anchors_text(const std::vector<Anchor>& anchors) const;

    const graph::PropertyGraph& g_;
    llm::Gateway& gateway_;
    PlannerConfig config_;
    graph::GraphSchema schema_;
    std::string schema_text_;
};

}  // namespace polyg::planner

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polyg/bench/templates.hpp"
#include "polyg/core/result.hpp"
#include "polyg/exec/executor.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"

namespace polyg::bench {

struct BenchmarkQuestion {
    std::string id;
    std::string template_id;
    taxonomy::Pattern pattern = taxonomy::Pattern::sxx;
    std::string question;  // template text with entity names filled in
    std::vector<std::string> paraphrases;
    int chosen = 0;  // index into paraphrases; original used when empty
    std::map<std::string, std::string> slots;  // slot name -> entity id
    // Normalized entity names, sorted; present iff the template has an
    // answer query, and non-empty then.
    std::optional<std::vector<std::string>> gold_answers;
    std::string graph_id;
    bool paraphrase_failed = false;
};

// The question text the pipeline should be asked: the chosen paraphrase,
// or the original when none were produced.
const std::string& effective_question(const BenchmarkQuestion& q);

// One record per line; field order is fixed. paraphrase_failed appears
// only when set, gold_answers only when present.
std::string to_json_line(const BenchmarkQuestion& q);
Result<BenchmarkQuestion> question_from_json(const std::string& line);

struct GenOptions {
    // Exactly one of the two must be set. total is split evenly, the
    // remainder going to the earliest templates.
    std::optional<int> per_template;
    std::optional<int> total;
    std::uint64_t seed = 0;
    std::string graph_id;
    exec::ExecLimits limits;
};

struct SkipEntry {
    std::string template_id;
    int requested = 0;
    int produced = 0;
    std::string reason;
};

struct GenOutput {
    std::vector<BenchmarkQuestion> questions;
    std::vector<SkipEntry> skips;  // templates that fell short, with why
};

// Draws selection rows uniformly without replacement (seeded, rejection
// sampled) and fills the template text. Questions from annotatable
// templates carry gold answers; candidate rows whose gold set is empty
// are redrawn. Deterministic under (graph, templates, options).
Result<GenOutput> generate(const graph::PropertyGraph& g,
                           const std::vector<QuestionTemplate>& templates,
                           const GenOptions& opts);

// Runs the template's answer query with the question's slot ids spliced
// in; gold answers are the normalized names of returned entities. An
// empty result is an error (the caller redraws).
Result<std::vector<std::string>> gold_for(
    const graph::PropertyGraph& g, const QuestionTemplate& t,
    const std::map<std::string, std::string>& slots,
    const exec::ExecLimits& limits = {});

// Single-question annotation: fills q.gold_answers via gold_for. No-op
// for templates without an answer query.
Result<BenchmarkQuestion> annotate(const graph::PropertyGraph& g,
                                   const QuestionTemplate& t,
                                   BenchmarkQuestion q,
                                   const exec::ExecLimits& limits = {});

// Asks the model for n distinct rewrites (numbered list) and draws the
// variant to use from rng. On any failure the original question is kept
// and paraphrase_failed is set.
BenchmarkQuestion paraphrase(BenchmarkQuestion q, llm::Gateway& gateway,
                             std::mt19937_64& rng, int n = 4);

}  // namespace polyg::bench

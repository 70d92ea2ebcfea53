#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polyg/core/result.hpp"
#include "polyg/llm/gateway.hpp"

namespace polyg::eval {

// Names from the gold universe found in the answer by whole-token
// containment after normalization (lowercase, punctuation stripped). The
// returned strings are the universe's own spellings.
std::set<std::string> extract_entities(const std::string& answer,
                                       const std::set<std::string>& gold_universe);

// Harmonic mean of precision and recall over normalized name sets; 0 when
// predicted is empty. gold must be non-empty (0 returned otherwise).
double f1(const std::set<std::string>& predicted,
          const std::set<std::string>& gold);

// 1 iff any gold name is predicted, after the same normalization.
int hit(const std::set<std::string>& predicted,
        const std::set<std::string>& gold);

struct EvalRecord {
    std::string question_id;
    std::string pattern;  // serialized question pattern label
    std::string answer;
    std::optional<std::set<std::string>> gold;
    std::optional<double> f1;
    std::optional<int> hit;
    std::chrono::milliseconds latency{0};
    llm::Usage usage;
};

// Serialized one record per line; gold/f1/hit appear only when present.
std::string to_json_line(const EvalRecord& r);

struct MetricBucket {
    int count = 0;
    int with_gold = 0;     // records carrying gold answers
    double mean_f1 = 0.0;  // over with_gold; 0 when none
    double mean_hit = 0.0;
    double mean_latency_ms = 0.0;  // over all records in the bucket
    double mean_prompt_tokens = 0.0;
    double mean_completion_tokens = 0.0;
};

struct Report {
    MetricBucket overall;
    std::map<std::string, MetricBucket> by_pattern;
};

// Means over the records; F1/Hit averaged per-question over the
// gold-bearing subset. Empty input gives an empty report.
Report aggregate(const std::vector<EvalRecord>& records);

// Human-readable fixed-width table, one row overall plus one per pattern.
std::string render_report(const Report& report);

}  // namespace polyg::eval

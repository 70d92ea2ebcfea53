#include "polyg/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "polyg/core/text.hpp"

namespace polyg::eval {

namespace {

std::set<std::string> normalized(const std::set<std::string>& names) {
    std::set<std::string> out;
    for (const auto& n : names) {
        auto key = normalize_name(n);
        if (!key.empty()) out.insert(key);
    }
    return out;
}

}  // namespace

std::set<std::string> extract_entities(const std::string& answer,
                                       const std::set<std::string>& gold_universe) {
    auto answer_tokens = word_tokens(answer);
    std::set<std::string> found;
    if (answer_tokens.empty()) return found;
    for (const auto& name : gold_universe) {
        auto name_tokens = word_tokens(name);
        if (name_tokens.empty() || name_tokens.size() > answer_tokens.size())
            continue;
        for (std::size_t s = 0;
             s + name_tokens.size() <= answer_tokens.size(); ++s) {
            bool all = true;
            for (std::size_t i = 0; i < name_tokens.size(); ++i) {
                if (answer_tokens[s + i] != name_tokens[i]) {
                    all = false;
                    break;
                }
            }
            if (all) {
                found.insert(name);
                break;
            }
        }
    }
    return found;
}

double f1(const std::set<std::string>& predicted,
          const std::set<std::string>& gold) {
    auto g = normalized(gold);
    if (g.empty()) return 0.0;
    auto p = normalized(predicted);
    if (p.empty()) return 0.0;
    std::size_t both = 0;
    for (const auto& name : p)
        if (g.count(name)) ++both;
    if (both == 0) return 0.0;
    double precision = static_cast<double>(both) / static_cast<double>(p.size());
    double recall = static_cast<double>(both) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

int hit(const std::set<std::string>& predicted,
        const std::set<std::string>& gold) {
    auto g = normalized(gold);
    auto p = normalized(predicted);
    for (const auto& name : p)
        if (g.count(name)) return 1;
    return 0;
}

std::string to_json_line(const EvalRecord& r) {
    nlohmann::ordered_json j;
    j["question_id"] = r.question_id;
    j["pattern"] = r.pattern;
    j["answer"] = r.answer;
    if (r.gold) j["gold"] = std::vector<std::string>(r.gold->begin(), r.gold->end());
    if (r.f1) j["f1"] = *r.f1;
    if (r.hit) j["hit"] = *r.hit;
    j["latency_ms"] = r.latency.count();
    j["usage"] = {{"prompt_tokens", r.usage.prompt_tokens},
                  {"completion_tokens", r.usage.completion_tokens}};
    return j.dump();
}

namespace {

void fold(MetricBucket& b, const EvalRecord& r) {
    // Accumulate sums; finish() divides.
    b.count += 1;
    if (r.gold) {
        b.with_gold += 1;
        b.mean_f1 += r.f1.value_or(0.0);
        b.mean_hit += r.hit.value_or(0);
    }
    b.mean_latency_ms += static_cast<double>(r.latency.count());
    b.mean_prompt_tokens += static_cast<double>(r.usage.prompt_tokens);
    b.mean_completion_tokens += static_cast<double>(r.usage.completion_tokens);
}

void finish(MetricBucket& b) {
    if (b.with_gold > 0) {
        b.mean_f1 /= b.with_gold;
        b.mean_hit /= b.with_gold;
    }
    if (b.count > 0) {
        b.mean_latency_ms /= b.count;
        b.mean_prompt_tokens /= b.count;
        b.mean_completion_tokens /= b.count;
    }
}

}  // namespace

Report aggregate(const std::vector<EvalRecord>& records) {
    Report report;
    for (const auto& r : records) {
        fold(report.overall, r);
        fold(report.by_pattern[r.pattern], r);
    }
    finish(report.overall);
    for (auto& [_, bucket] : report.by_pattern) finish(bucket);
    return report;
}

std::string render_report(const Report& report) {
    std::ostringstream out;
    auto row = [&](const std::string& label, const MetricBucket& b) {
        out << std::left << std::setw(10) << label << std::right
            << std::setw(7) << b.count << std::setw(10) << b.with_gold;
        out << std::fixed << std::setprecision(4) << std::setw(9) << b.mean_f1
            << std::setw(9) << b.mean_hit;
        out << std::setprecision(1) << std::setw(13) << b.mean_latency_ms
            << std::setw(11) << b.mean_prompt_tokens << std::setw(13)
            << b.mean_completion_tokens << "\n";
    };
    out << std::left << std::setw(10) << "pattern" << std::right
        << std::setw(7) << "count" << std::setw(10) << "with_gold"
        << std::setw(9) << "f1" << std::setw(9) << "hit" << std::setw(13)
        << "latency_ms" << std::setw(11) << "prompt_tok" << std::setw(13)
        << "compl_tok" << "\n";
    row("all", report.overall);
    for (const auto& [pattern, bucket] : report.by_pattern) row(pattern, bucket);
    return out.str();
}

}  // namespace polyg::eval

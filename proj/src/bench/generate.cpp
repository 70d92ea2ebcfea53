#include "polyg/bench/generate.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "polyg/core/random.hpp"
#include "polyg/core/text.hpp"
#include "polyg/cypher/parser.hpp"
#include "polyg/planner/prompts.hpp"

namespace polyg::bench {

using nlohmann::json;
using nlohmann::ordered_json;

const std::string& effective_question(const BenchmarkQuestion& q) {
    if (q.paraphrases.empty()) return q.question;
    std::size_t index = static_cast<std::size_t>(q.chosen);
    if (index >= q.paraphrases.size()) return q.question;
    return q.paraphrases[index];
}

std::string to_json_line(const BenchmarkQuestion& q) {
    ordered_json j;
    j["id"] = q.id;
    j["template_id"] = q.template_id;
    j["pattern"] = taxonomy::to_string(q.pattern);
    j["question"] = q.question;
    j["paraphrases"] = q.paraphrases;
    j["chosen"] = q.chosen;
    j["slots"] = q.slots;
    if (q.gold_answers) j["gold_answers"] = *q.gold_answers;
    j["graph_id"] = q.graph_id;
    if (q.paraphrase_failed) j["paraphrase_failed"] = true;
    return j.dump();
}

Result<BenchmarkQuestion> question_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        return Error{std::string("malformed question record: ") + e.what()};
    }
    BenchmarkQuestion q;
    try {
        q.id = j.at("id").get<std::string>();
        q.template_id = j.at("template_id").get<std::string>();
        auto pattern =
            taxonomy::pattern_from_string(j.at("pattern").get<std::string>());
        if (!pattern)
            return Error{"question " + q.id + ": unknown pattern \"" +
                         j.at("pattern").get<std::string>() + "\""};
        q.pattern = *pattern;
        q.question = j.at("question").get<std::string>();
        q.paraphrases = j.at("paraphrases").get<std::vector<std::string>>();
        q.chosen = j.at("chosen").get<int>();
        q.slots = j.at("slots").get<std::map<std::string, std::string>>();
        if (j.contains("gold_answers"))
            q.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
        q.graph_id = j.at("graph_id").get<std::string>();
        q.paraphrase_failed = j.value("paraphrase_failed", false);
    } catch (const json::exception& e) {
        return Error{std::string("malformed question record: ") + e.what()};
    }
    return q;
}

Result<std::vector<std::string>> gold_for(
    const graph::PropertyGraph& g, const QuestionTemplate& t,
    const std::map<std::string, std::string>& slots,
    const exec::ExecLimits& limits) {
    if (!t.answer_text)
        return Error{"template " + t.id + " has no answer query"};
    auto text = substitute_slots(*t.answer_text, slots);
    auto parsed = cypher::parse(text);
    if (!parsed)
        return Error{"template " + t.id +
                     ": bound answer query does not parse: " +
                     parsed.error().to_string()};
    auto result = exec::execute(g, *parsed, limits);
    if (!result)
        return Error{"template " + t.id + ": answer query failed: " +
                     result.error().message};

    std::set<std::string> names;
    for (const auto& row : result->rows) {
        for (const auto& cell : row) {
            if (std::holds_alternative<exec::EntityRef>(cell)) {
                auto name = normalize_name(
                    g.entity(std::get<exec::EntityRef>(cell).index).name);
                if (!name.empty()) names.insert(name);
            }
        }
    }
    if (names.empty())
        return Error{"template " + t.id + ": answer query returned no names"};
    return std::vector<std::string>(names.begin(), names.end());
}

Result<BenchmarkQuestion> annotate(const graph::PropertyGraph& g,
                                   const QuestionTemplate& t,
                                   BenchmarkQuestion q,
                                   const exec::ExecLimits& limits) {
    if (!t.answer_text) return q;
    auto gold = gold_for(g, t, q.slots, limits);
    if (!gold) return Error{gold.error().message};
    q.gold_answers = std::move(*gold);
    return q;
}

namespace {

struct Binding {
    std::map<std::string, std::string> ids;    // slot -> entity id
    std::map<std::string, std::string> names;  // slot -> display name
};

// Pulls the slot bindings out of one selection row; every slot column must
// hold an entity.
Result<Binding> binding_from_row(const graph::PropertyGraph& g,
                                 const QuestionTemplate& t,
                                 const std::vector<std::string>& columns,
                                 const std::vector<exec::Value>& row) {
    Binding b;
    for (const auto& slot : t.slots) {
        std::size_t col = columns.size();
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == slot) {
                col = i;
                break;
            }
        }
        if (col == columns.size())
            return Error{"slot [" + slot + "] missing from selection columns"};
        if (!std::holds_alternative<exec::EntityRef>(row[col]))
            return Error{"selection column \"" + slot +
                         "\" did not return entities"};
        const auto& entity =
            g.entity(std::get<exec::EntityRef>(row[col]).index);
        b.ids[slot] = entity.id;
        b.names[slot] = entity.name;
    }
    return b;
}

}  // namespace

Result<GenOutput> generate(const graph::PropertyGraph& g,
                           const std::vector<QuestionTemplate>& templates,
                           const GenOptions& opts) {
    if (opts.per_template.has_value() == opts.total.has_value())
        return Error{"set exactly one of per_template and total"};
    if ((opts.per_template && *opts.per_template < 0) ||
        (opts.total && *opts.total < 0))
        return Error{"question counts must be non-negative"};
    if (templates.empty() && opts.total && *opts.total > 0)
        return Error{"no templates to draw from"};

    std::vector<int> requested(templates.size(), 0);
    if (opts.per_template) {
        for (auto& r : requested) r = *opts.per_template;
    } else {
        int base = *opts.total / static_cast<int>(templates.size());
        int extra = *opts.total % static_cast<int>(templates.size());
        for (std::size_t i = 0; i < templates.size(); ++i)
            requested[i] = base + (static_cast<int>(i) < extra ? 1 : 0);
    }

    std::mt19937_64 rng(opts.seed);
    GenOutput out;
    for (std::size_t ti = 0; ti < templates.size(); ++ti) {
        const QuestionTemplate& t = templates[ti];
        if (requested[ti] == 0) continue;

        auto selection = exec::execute(g, t.selection, opts.limits);
        if (!selection) {
            out.skips.push_back({t.id, requested[ti], 0,
                                 "selection failed: " +
                                     selection.error().message});
            continue;
        }
        if (selection->empty()) {
            out.skips.push_back(
                {t.id, requested[ti], 0, "selection returned no rows"});
            continue;
        }

        std::vector<std::size_t> available(selection->rows.size());
        for (std::size_t i = 0; i < available.size(); ++i) available[i] = i;

        int produced = 0;
        std::string last_reason = "selection rows exhausted";
        while (produced < requested[ti] && !available.empty()) {
            std::size_t pick = static_cast<std::size_t>(
                bounded_draw(rng, available.size()));
            std::size_t row_index = available[pick];
            available[pick] = available.back();
            available.pop_back();

            auto binding = binding_from_row(g, t, selection->columns,
                                            selection->rows[row_index]);
            if (!binding) {
                last_reason = binding.error().message;
                continue;
            }

            BenchmarkQuestion q;
            q.template_id = t.id;
            q.pattern = t.pattern;
            q.question = substitute_slots(t.text, binding->names);
            q.slots = binding->ids;
            q.graph_id = opts.graph_id;

            if (t.answer_text) {
                auto gold = gold_for(g, t, q.slots, opts.limits);
                if (!gold) {
                    last_reason = gold.error().message;
                    continue;  // redraw
                }
                q.gold_answers = std::move(*gold);
            }

            ++produced;
            q.id = t.id + "-q" + std::to_string(produced);
            out.questions.push_back(std::move(q));
        }
        if (produced < requested[ti]) {
            out.skips.push_back({t.id, requested[ti], produced, last_reason});
        }
    }
    return out;
}

BenchmarkQuestion paraphrase(BenchmarkQuestion q, llm::Gateway& gateway,
                             std::mt19937_64& rng, int n) {
    auto res = gateway.complete(llm::Stage::paraphrase,
                                planner::prompts::paraphrase(q.question, n));
    if (!res) {
        q.paraphrase_failed = true;
        return q;
    }

    std::vector<std::string> variants;
    std::set<std::string> seen;
    for (const auto& raw : split(res->content, '\n')) {
        auto line = trim(raw);
        std::size_t d = 0;
        while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d])))
            ++d;
        if (d == 0 || d >= line.size()) continue;
        if (line[d] != '.' && line[d] != ')') continue;
        auto text = trim(line.substr(d + 1));
        if (text.empty()) continue;
        if (!seen.insert(to_lower(collapse_whitespace(text))).second) continue;
        variants.push_back(text);
        if (static_cast<int>(variants.size()) == n) break;
    }
    if (static_cast<int>(variants.size()) < n) {
        q.paraphrase_failed = true;
        return q;
    }
    q.paraphrases = std::move(variants);
    q.chosen = static_cast<int>(bounded_draw(rng, static_cast<std::uint64_t>(n)));
    return q;
}

}  // namespace polyg::bench

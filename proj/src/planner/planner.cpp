#include "polyg/planner/planner.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include <json.hpp>

#include "polyg/core/text.hpp"
#include "polyg/cypher/parser.hpp"
#include "polyg/cypher/render.hpp"
#include "polyg/cypher/validate.hpp"

namespace polyg::planner {

using taxonomy::Pattern;

const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::pending: return "pending";
        case StepStatus::succeeded: return "succeeded";
        case StepStatus::failed_exhausted: return "failed_exhausted";
    }
    return "pending";
}

std::string to_json_line(const TraceRecord& r) {
    nlohmann::ordered_json j;
    j["stage"] = r.stage;
    j["step"] = r.step;
    j["fingerprint"] = r.fingerprint;
    j["query"] = r.query;
    j["result_digest"] = r.result_digest;
    j["usage"] = {{"prompt_tokens", r.usage.prompt_tokens},
                  {"completion_tokens", r.usage.completion_tokens}};
    return j.dump();
}

std::string trace_to_jsonl(const QueryPlan& plan) {
    std::string out;
    for (const auto& r : plan.trace) {
        out += to_json_line(r);
        out += '\n';
    }
    return out;
}

namespace {

constexpr const char* kGatewayPrefix = "gateway: ";

bool is_gateway_error(const std::string& message) {
    return message.rfind(kGatewayPrefix, 0) == 0;
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Token boundary check for pattern labels; '*' is part of the labels
// themselves, so a neighboring '*' also glues ("s***" matches nothing).
bool label_boundary(const std::string& text, std::size_t pos, std::size_t len) {
    if (pos > 0 && (ident_char(text[pos - 1]) || text[pos - 1] == '*')) return false;
    std::size_t end = pos + len;
    if (end < text.size() && (ident_char(text[end]) || text[end] == '*')) return false;
    return true;
}

std::size_t find_label(const std::string& text, const std::string& label) {
    std::size_t pos = 0;
    while ((pos = text.find(label, pos)) != std::string::npos) {
        if (label_boundary(text, pos, label.size())) return pos;
        ++pos;
    }
    return std::string::npos;
}

constexpr Pattern kBasicPatterns[] = {Pattern::sxx, Pattern::spx, Pattern::sxo,
                                      Pattern::spo};

}  // namespace

std::vector<Anchor> resolve_anchors(const graph::PropertyGraph& g,
                                    const std::string& question) {
    auto q_tokens = word_tokens(question);
    if (q_tokens.empty()) return {};

    struct Match {
        std::size_t start;
        std::size_t len;
        const std::string* name;
        const std::vector<std::uint32_t>* indices;
    };
    std::vector<Match> matches;
    for (const auto& [name, indices] : g.name_index()) {
        auto n_tokens = word_tokens(name);
        if (n_tokens.empty() || n_tokens.size() > q_tokens.size()) continue;
        for (std::size_t s = 0; s + n_tokens.size() <= q_tokens.size(); ++s) {
            bool all = true;
            for (std::size_t i = 0; i < n_tokens.size(); ++i) {
                if (q_tokens[s + i] != n_tokens[i]) {
                    all = false;
                    break;
                }
            }
            if (all) matches.push_back({s, n_tokens.size(), &name, &indices});
        }
    }
    std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.len != b.len) return a.len > b.len;   // longest first
        return *a.name < *b.name;
    });

    std::vector<Anchor> anchors;
    std::vector<std::pair<std::size_t, std::size_t>> taken;  // (start, len)
    for (const auto& m : matches) {
        bool overlaps = false;
        for (auto [ts, tl] : taken) {
            if (m.start < ts + tl && ts < m.start + m.len) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;
        taken.emplace_back(m.start, m.len);
        Anchor a;
        a.name = *m.name;
        for (auto idx : *m.indices) a.ids.push_back(g.entity(idx).id);
        std::sort(a.ids.begin(), a.ids.end());
        anchors.push_back(std::move(a));
    }
    return anchors;
}

std::optional<Categorization> parse_categorization(const std::string& text) {
    std::string lower = to_lower(text);
    std::size_t best_pos = std::string::npos;
    Categorization best;
    for (Pattern p : kBasicPatterns) {
        auto pos = find_label(lower, taxonomy::to_string(p));
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = Categorization{false, p};
        }
    }
    auto nested_pos = find_label(lower, "nested");
    if (nested_pos != std::string::npos && nested_pos < best_pos) {
        best_pos = nested_pos;
        best = Categorization{true, Pattern::sxx};
    }
    if (best_pos == std::string::npos) return std::nullopt;
    return best;
}

std::optional<std::vector<std::pair<Pattern, std::string>>> parse_plan(
    const std::string& text) {
    std::vector<std::pair<Pattern, std::string>> steps;
    for (const auto& raw : split(text, '\n')) {
        auto bar = raw.find('|');
        if (bar == std::string::npos) continue;
        std::string left = to_lower(raw.substr(0, bar));
        std::string desc = trim(raw.substr(bar + 1));
        if (desc.empty()) return std::nullopt;
        std::size_t best_pos = std::string::npos;
        std::optional<Pattern> found;
        for (Pattern p : kBasicPatterns) {
            auto pos = find_label(left, taxonomy::to_string(p));
            if (pos != std::string::npos && pos < best_pos) {
                best_pos = pos;
                found = p;
            }
        }
        if (!found) return std::nullopt;
        steps.emplace_back(*found, desc);
    }
    if (steps.empty()) return std::nullopt;
    return steps;
}

std::string extract_query_text(const std::string& text) {
    std::string body = text;
    auto open = body.find("```");
    if (open != std::string::npos) {
        std::size_t start = open + 3;
        auto close = body.find("```", start);
        std::string inner = close == std::string::npos
                                ? body.substr(start)
                                : body.substr(start, close - start);
        // A bare language tag on the fence line is not query text.
        auto nl = inner.find('\n');
        if (nl != std::string::npos) {
            std::string tag = trim(inner.substr(0, nl));
            bool word = !tag.empty() &&
                        std::all_of(tag.begin(), tag.end(), [](char c) {
                            return std::isalpha(static_cast<unsigned char>(c)) != 0;
                        });
            if (tag.empty() || (word && to_lower(tag) != "match"))
                inner = inner.substr(nl + 1);
        }
        body = inner;
    }
    std::string lower = to_lower(body);
    std::size_t pos = 0;
    while ((pos = lower.find("match", pos)) != std::string::npos) {
        if (label_boundary(lower, pos, 5)) return trim(body.substr(pos));
        ++pos;
    }
    return trim(body);
}

Planner::Planner(const graph::PropertyGraph& g, llm::Gateway& gateway,
                 PlannerConfig config)
    : g_(g),
      gateway_(gateway),
      config_(config),
      schema_(graph::schema_of(g)),
      schema_text_(prompts::render_schema(schema_)) {}

Result<std::string> Planner::call(QueryPlan& plan, llm::Stage stage,
                                  const std::vector<llm::Message>& messages,
                                  int step_index) {
    auto res = gateway_.complete(stage, messages);
    TraceRecord rec;
    rec.stage = llm::to_string(stage);
    rec.step = step_index;
    rec.fingerprint = llm::fingerprint(gateway_.model(), messages);
    if (res) rec.usage = res->usage;
    plan.trace.push_back(std::move(rec));
    if (!res) return Error{kGatewayPrefix + res.error().message};
    return res->content;
}

Result<Categorization> Planner::categorize(const std::string& question,
                                           QueryPlan& plan) {
    auto messages = prompts::categorize(question);
    auto reply = call(plan, llm::Stage::categorize, messages, -1);
    if (!reply) return Error{reply.error().message};
    auto cat = parse_categorization(*reply);
    if (cat) return *cat;

    auto again = prompts::reprompt(
        messages, *reply,
        "Reply with exactly one line: \"basic s**\", \"basic sp*\", "
        "\"basic s*o\", \"basic spo\", or \"nested\".");
    auto second = call(plan, llm::Stage::categorize, again, -1);
    if (!second) return Error{second.error().message};
    cat = parse_categorization(*second);
    if (cat) return *cat;
    return Error{"classification failed: no pattern label in reply \"" +
                 collapse_whitespace(*second) + "\""};
}

Result<Ok> Planner::decompose(const std::string& question,
                              const Categorization& cat, QueryPlan& plan) {
    if (!cat.nested) {
        PlanStep step;
        step.description = question;
        step.pattern = cat.pattern;
        plan.steps.push_back(std::move(step));
        return Ok{};
    }
    auto messages = prompts::decompose(question, schema_text_);
    auto reply = call(plan, llm::Stage::decompose, messages, -1);
    if (!reply) return Error{reply.error().message};
    auto parsed = parse_plan(*reply);
    if (!parsed) {
        auto again = prompts::reprompt(
            messages, *reply,
            "List one step per line in the exact form "
            "\"step <n>: <pattern> | <description>\" where <pattern> is "
            "s**, sp*, s*o or spo. No other lines.");
        auto second = call(plan, llm::Stage::decompose, again, -1);
        if (!second) return Error{second.error().message};
        parsed = parse_plan(*second);
        if (!parsed)
            return Error{"decomposition failed: no step lines in reply \"" +
                         collapse_whitespace(*second) + "\""};
    }
    for (auto& [pattern, desc] : *parsed) {
        PlanStep step;
        step.pattern = pattern;
        step.description = desc;
        plan.steps.push_back(std::move(step));
    }
    return Ok{};
}

Result<std::string> Planner::instantiate_step(QueryPlan& plan,
                                              std::size_t index) {
    PlanStep& step = plan.steps[index];
    if (index == 0) {
        step.instantiated_question = step.description;
        return *step.instantiated_question;
    }
    std::vector<context::StepRecord> priors;
    for (std::size_t i = 0; i < index; ++i) {
        const PlanStep& prev = plan.steps[i];
        if (prev.status != StepStatus::succeeded)
            return Error{"skipped: step " + std::to_string(i + 1) +
                         " did not succeed"};
        if (prev.answer_text.empty())
            return Error{"skipped: step " + std::to_string(i + 1) +
                         " produced no usable answer"};
        priors.push_back({prev.instantiated_question.value_or(prev.description),
                          prev.answer_text});
    }

    // Candidate lists for ambiguous names mentioned so far, so the model
    // can pin a concrete entity instead of guessing.
    std::string mention_text = step.description;
    for (const auto& p : priors) {
        mention_text += ' ';
        mention_text += p.answer;
    }
    std::string candidates;
    for (const auto& a : resolve_anchors(g_, mention_text)) {
        if (a.ids.size() < 2) continue;
        candidates += "  " + a.name + ": " + join(a.ids, ", ") + "\n";
    }

    auto reply = call(
        plan, llm::Stage::instantiate,
        prompts::instantiate(plan.question, priors, step.description, candidates),
        static_cast<int>(index));
    if (!reply) return Error{reply.error().message};
    std::string question;
    for (const auto& line : split(*reply, '\n')) {
        auto t = trim(line);
        if (!t.empty()) {
            question = t;
            break;
        }
    }
    if (question.empty())
        return Error{"instantiation failed: empty reply for step " +
                     std::to_string(index + 1)};
    step.instantiated_question = question;
    return question;
}

Proposal Planner::propose_from_reply(const std::string& reply,
                                     Pattern pattern) {
    Proposal prop;
    prop.text = extract_query_text(reply);
    if (prop.text.empty()) {
        prop.text = collapse_whitespace(reply);
        prop.error = "no query found in reply";
        return prop;
    }
    auto parsed = cypher::parse(prop.text);
    if (!parsed) {
        prop.error = "parse error: " + parsed.error().to_string();
        return prop;
    }
    prop.text = cypher::render(*parsed);

    auto violations = cypher::validate(*parsed, schema_);
    if (!violations.empty()) {
        std::vector<std::string> parts;
        for (const auto& v : violations) parts.push_back(v.message);
        prop.error = "schema validation: " + join(parts, "; ");
        return prop;
    }

    bool has_shortest = false;
    bool has_varlen = false;
    for (const auto& m : parsed->matches) {
        if (m.shortest_k) has_shortest = true;
        for (const auto& p : m.paths)
            for (const auto& e : p.edges)
                if (e.hops.variable_length) has_varlen = true;
    }
    if (pattern == Pattern::spx && (has_shortest || has_varlen)) {
        prop.error =
            "shape: a relation-chain query must use fixed hops, not SHORTEST "
            "or variable-length edges";
        return prop;
    }
    if (pattern == Pattern::spo && !has_shortest) {
        prop.error = "shape: a constrained-path query must use MATCH P = "
                     "SHORTEST k (...) and RETURN the path";
        return prop;
    }
    prop.query = std::move(*parsed);
    return prop;
}

std::string Planner::anchors_text(const std::vector<Anchor>& anchors) const {
    std::string out;
    for (const auto& a : anchors) {
        out += "  " + a.name + ": " + join(a.ids, ", ");
        if (a.ids.size() > 1) out += "  (ambiguous; prefer the first)";
        out += "\n";
    }
    return out;
}

Result<Proposal> Planner::generate_query(QueryPlan& plan, std::size_t index,
                                         const std::vector<Anchor>& anchors) {
    PlanStep& step = plan.steps[index];
    const std::string question =
        step.instantiated_question.value_or(step.description);

    auto templated = [&](std::string text) -> Result<Proposal> {
        auto parsed = cypher::parse(text);
        if (!parsed)
            return Error{"internal: query template failed to parse: " +
                         parsed.error().to_string()};
        Proposal prop;
        prop.query = std::move(*parsed);
        prop.text = cypher::render(*prop.query);
        TraceRecord rec;
        rec.stage = "generate";
        rec.step = static_cast<int>(index);
        rec.query = prop.text;
        plan.trace.push_back(std::move(rec));
        return prop;
    };

    switch (step.pattern) {
        case Pattern::sxx:
            return templated(
                "MATCH (s {id: " + cypher::render_string_literal(anchors[0].ids[0]) +
                "})-[p]->(o) RETURN p, o");
        case Pattern::sxo:
            return templated(
                "MATCH P = SHORTEST " + std::to_string(config_.shortest_k) +
                " (s {id: " + cypher::render_string_literal(anchors[0].ids[0]) +
                "})-[*]->(o {id: " +
                cypher::render_string_literal(anchors[1].ids[0]) +
                "}) RETURN P");
        case Pattern::spx:
        case Pattern::spo: {
            auto messages =
                step.pattern == Pattern::spx
                    ? prompts::generate_spx(schema_text_, question,
                                            anchors_text(anchors),
                                            config_.limits.hop_cap)
                    : prompts::generate_spo(schema_text_, question,
                                            anchors_text(anchors),
                                            config_.shortest_k,
                                            config_.limits.hop_cap);
            auto reply = call(plan, llm::Stage::generate, messages,
                              static_cast<int>(index));
            if (!reply) return Error{reply.error().message};
            return propose_from_reply(*reply, step.pattern);
        }
        case Pattern::nested:
            break;
    }
    return Error{"internal: nested step reached query generation"};
}

Result<Ok> Planner::execute_with_correction(QueryPlan& plan, std::size_t index,
                                            Proposal first) {
    PlanStep& step = plan.steps[index];
    const bool model_written =
        step.pattern == Pattern::spx || step.pattern == Pattern::spo;
    const std::string question =
        step.instantiated_question.value_or(step.description);

    Proposal prop = std::move(first);
    for (;;) {
        bool ok = false;
        std::string outcome;
        if (prop.query) {
            auto res = exec::execute(g_, *prop.query, config_.limits);
            TraceRecord rec;
            rec.stage = "execute";
            rec.step = static_cast<int>(index);
            rec.query = prop.text;
            if (res) {
                rec.result_digest = fnv1a_hex(exec::serialize_result(g_, *res));
                if (res->empty() && model_written && config_.policy.retry_on_empty) {
                    outcome = "query executed but returned no rows";
                } else {
                    ok = true;
                    step.result = std::move(*res);
                }
            } else {
                outcome = "execution error: " + res.error().message;
            }
            plan.trace.push_back(std::move(rec));
        } else {
            outcome = prop.error;
        }

        step.attempts.push_back({prop.text, ok ? "ok" : outcome});
        if (ok) {
            step.status = StepStatus::succeeded;
            step.query = std::move(prop.query);
            finish_step(plan, index);
            return Ok{};
        }
        if (!model_written ||
            static_cast<int>(step.attempts.size()) >=
                1 + config_.policy.max_retries) {
            step.status = StepStatus::failed_exhausted;
            step.failure = outcome;
            return Ok{};
        }
        auto reply = call(plan, llm::Stage::correct,
                          prompts::correct(schema_text_, question, step.pattern,
                                           step.attempts),
                          static_cast<int>(index));
        if (!reply) {
            step.status = StepStatus::failed_exhausted;
            step.failure = reply.error().message;
            return Error{reply.error().message};
        }
        prop = propose_from_reply(*reply, step.pattern);
    }
}

void Planner::finish_step(QueryPlan& plan, std::size_t index) {
    PlanStep& step = plan.steps[index];
    auto bundle = context::build_bundle(g_, *step.result, step.pattern,
                                        config_.context_budget);
    step.bundle_text = bundle.text;

    // Compact answer for downstream steps: distinct entity names in row
    // order, else the rendered paths, else scalar values.
    std::vector<std::string> names;
    std::set<std::string> seen;
    std::vector<std::string> scalars;
    for (const auto& row : step.result->rows) {
        for (const auto& cell : row) {
            if (std::holds_alternative<exec::EntityRef>(cell)) {
                const auto& name =
                    g_.entity(std::get<exec::EntityRef>(cell).index).name;
                if (seen.insert(name).second) names.push_back(name);
            } else if (std::holds_alternative<std::int64_t>(cell) ||
                       std::holds_alternative<double>(cell) ||
                       std::holds_alternative<std::string>(cell)) {
                scalars.push_back(exec::value_to_string(g_, cell));
            }
        }
    }
    if (!names.empty()) {
        step.answer_text = join(names, ", ");
    } else if (!bundle.paths.empty()) {
        step.answer_text = join(bundle.paths, "; ");
    } else {
        step.answer_text = join(scalars, ", ");
    }
}

AnswerRecord Planner::answer(const std::string& question) {
    AnswerRecord rec;
    rec.plan.question = question;
    QueryPlan& plan = rec.plan;

    auto fail = [&](const std::string& stage, const std::string& message) {
        rec.ok = false;
        rec.failure_stage = is_gateway_error(message) ? "gateway" : stage;
        rec.answer = message;
        return rec;
    };

    auto cat = categorize(question, plan);
    if (!cat) return fail("categorize", cat.error().message);

    auto dec = decompose(question, *cat, plan);
    if (!dec) return fail("decompose", dec.error().message);

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        PlanStep& step = plan.steps[i];

        auto inst = instantiate_step(plan, i);
        if (!inst) {
            const std::string& m = inst.error().message;
            if (is_gateway_error(m)) return fail("instantiate", m);
            step.status = StepStatus::failed_exhausted;
            step.failure = m;
            continue;
        }

        auto anchors = resolve_anchors(g_, *inst);
        std::size_t needed =
            (step.pattern == Pattern::sxo || step.pattern == Pattern::spo) ? 2
                                                                           : 1;
        if (anchors.size() < needed)
            return fail("resolution",
                        "entity resolution failed: found " +
                            std::to_string(anchors.size()) +
                            " graph entities in \"" + *inst + "\", need " +
                            std::to_string(needed));

        auto prop = generate_query(plan, i, anchors);
        if (!prop) return fail("generate", prop.error().message);

        auto execd = execute_with_correction(plan, i, std::move(*prop));
        if (!execd) return fail("execute", execd.error().message);
    }

    std::vector<context::StepRecord> records;
    for (const auto& s : plan.steps)
        records.push_back({s.instantiated_question.value_or(s.description),
                           s.status == StepStatus::succeeded ? s.answer_text
                                                             : ""});
    std::optional<std::string> facts;
    const PlanStep& last = plan.steps.back();
    if (last.status == StepStatus::succeeded && !last.bundle_text.empty())
        facts = last.bundle_text;

    auto reply = call(plan, llm::Stage::summarize,
                      context::render_summary_prompt(question, records, facts),
                      -1);
    if (!reply) return fail("summarize", reply.error().message);
    plan.final_answer = *reply;
    rec.answer = *reply;
    rec.ok = true;
    return rec;
}

}  // namespace polyg::planner

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "polyg/llm/gateway.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "polyg/core/text.hpp"

namespace polyg::llm {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fingerprint(const std::string& model,
                        const std::vector<Message>& messages) {
    // Unit separator keeps field boundaries unambiguous without escaping.
    std::string key = model;
    for (const auto& m : messages) {
        key += '\x1f';
        key += m.role;
        key += '\x1f';
        key += collapse_whitespace(m.content);
    }
    return fnv1a_hex(key);
}

// ---------------------------------------------------------------------------
// Live backend
// ---------------------------------------------------------------------------

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

// Errors the live backend may retry carry this prefix; it is stripped
// before the error reaches the caller.
constexpr const char* kRetryable = "retryable: ";

bool is_retryable(const std::string& msg) {
    return msg.rfind(kRetryable, 0) == 0;
}

std::string strip_retryable(const std::string& msg) {
    return is_retryable(msg) ? msg.substr(std::string(kRetryable).size()) : msg;
}

// Splits "https://host:port/prefix" into the client target and the path
// prefix httplib wants separately.
void split_base_url(const std::string& base_url, std::string& target,
                    std::string& prefix) {
    auto scheme_end = base_url.find("://");
    auto path_start = base_url.find('/', scheme_end == std::string::npos
                                             ? 0
                                             : scheme_end + 3);
    if (path_start == std::string::npos) {
        target = base_url;
        prefix.clear();
    } else {
        target = base_url.substr(0, path_start);
        prefix = base_url.substr(path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

Result<std::string> default_transport(const LiveBackend::Config& config,
                                      const std::string& body) {
    if (config.api_key.empty()) {
        return Error{"LLM_API_KEY is not set"};
    }
    std::string target, prefix;
    split_base_url(config.base_url, target, prefix);

    httplib::Client client(target);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + config.api_key}};

    auto res = client.Post(prefix + "/chat/completions", headers, body,
                           "application/json");
    if (!res) {
        return Error{std::string(kRetryable) + "connect failed: " +
                     httplib::to_string(res.error())};
    }
    if (res->status / 100 == 5) {
        return Error{std::string(kRetryable) + "http status " +
                     std::to_string(res->status)};
    }
    if (res->status / 100 != 2) {
        std::string detail = res->body.substr(0, 200);
        return Error{"http status " + std::to_string(res->status) +
                     (detail.empty() ? "" : ": " + detail)};
    }
    return res->body;
}

Result<Completion> parse_completion(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
        return Error{"malformed completion response: not valid JSON"};
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty()) {
        return Error{"malformed completion response: no choices"};
    }
    const auto& msg = doc["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content") ||
        !msg["message"]["content"].is_string()) {
        return Error{"malformed completion response: no message content"};
    }
    Completion out;
    out.content = msg["message"]["content"].get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& u = doc["usage"];
        if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number()) {
            out.usage.prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
        }
        if (u.contains("completion_tokens") &&
            u["completion_tokens"].is_number()) {
            out.usage.completion_tokens =
                u["completion_tokens"].get<std::int64_t>();
        }
    }
    return out;
}

}  // namespace

LiveBackend::Config LiveBackend::config_from_env() {
    Config c;
    c.base_url = env_or("LLM_BASE_URL", "https://api.openai.com/v1");
    c.api_key = env_or("LLM_API_KEY", "");
    return c;
}

std::string model_from_env() { return env_or("LLM_MODEL", "gpt-4o-mini"); }

LiveBackend::LiveBackend(Config config)
    : config_(std::move(config)), transport_(default_transport) {}

LiveBackend::LiveBackend(Config config, Transport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

Result<Completion> LiveBackend::complete(const std::string& model,
                                         const std::vector<Message>& messages) {
    ordered_json body;
    body["model"] = model;
    body["messages"] = ordered_json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(config_.backoff * attempt);
        }
        auto res = transport_(config_, payload);
        if (res) {
            return parse_completion(*res);
        }
        last_error = res.error().message;
        if (!is_retryable(last_error)) {
            return Error{last_error};
        }
    }
    return Error{strip_retryable(last_error) + " (after " +
                 std::to_string(config_.max_retries + 1) + " attempts)"};
}

// ---------------------------------------------------------------------------
// Record / replay
// ---------------------------------------------------------------------------

namespace {

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RecordBackend::RecordBackend(Backend& inner, std::string path)
    : inner_(inner), path_(std::move(path)) {}

Result<std::unique_ptr<RecordBackend>> RecordBackend::open(
    Backend& inner, const std::string& path, bool append) {
    auto mode = std::ios::out | (append ? std::ios::app : std::ios::trunc);
    std::ofstream f(path, mode);
    if (!f) {
        return Error{"cannot open cassette for writing: " + path};
    }
    return std::unique_ptr<RecordBackend>(new RecordBackend(inner, path));
}

Result<Completion> RecordBackend::complete(const std::string& model,
                                           const std::vector<Message>& messages) {
    auto res = inner_.complete(model, messages);
    if (!res) return res;

    ordered_json entry;
    entry["fingerprint"] = fingerprint(model, messages);
    entry["model"] = model;
    entry["messages"] = ordered_json::array();
    for (const auto& m : messages) {
        entry["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    entry["content"] = res->content;
    entry["usage"] = {{"prompt_tokens", res->usage.prompt_tokens},
                      {"completion_tokens", res->usage.completion_tokens}};
    entry["recorded_at"] = utc_timestamp();

    std::ofstream f(path_, std::ios::out | std::ios::app);
    if (!f) {
        return Error{"cannot append to cassette: " + path_};
    }
    f << entry.dump() << '\n';
    return res;
}

Result<std::unique_ptr<ReplayBackend>> ReplayBackend::open(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        return Error{"cannot open cassette: " + path};
    }
    std::unique_ptr<ReplayBackend> backend(new ReplayBackend());
    backend->path_ = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.contains("fingerprint") ||
            !doc.contains("content")) {
            return Error{"cassette " + path + " line " +
                         std::to_string(lineno) + ": malformed entry"};
        }
        Completion c;
        c.content = doc["content"].get<std::string>();
        if (doc.contains("usage") && doc["usage"].is_object()) {
            const auto& u = doc["usage"];
            if (u.contains("prompt_tokens")) {
                c.usage.prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
            }
            if (u.contains("completion_tokens")) {
                c.usage.completion_tokens =
                    u["completion_tokens"].get<std::int64_t>();
            }
        }
        // Later entries override earlier ones, so re-recording a single
        // request means appending, not editing the file.
        backend->entries_[doc["fingerprint"].get<std::string>()] = std::move(c);
    }
    return backend;
}

Result<Completion> ReplayBackend::complete(const std::string& model,
                                           const std::vector<Message>& messages) {
    std::string fp = fingerprint(model, messages);
    auto it = entries_.find(fp);
    if (it == entries_.end()) {
        return Error{"replay miss: fingerprint '" + fp +
                     "' has no recording in " + path_};
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

void ScriptedBackend::add(std::string needle, std::string response) {
    rules_.push_back({std::move(needle), std::move(response)});
}

Result<Completion> ScriptedBackend::complete(
    const std::string&, const std::vector<Message>& messages) {
    std::string last_user;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") {
            last_user = it->content;
            break;
        }
    }

    // First rule whose needle matches decides which needle answers; repeat
    // matches on that needle walk through its responses and then stick on
    // the last one.
    const Rule* chosen = nullptr;
    for (const auto& rule : rules_) {
        if (last_user.find(rule.needle) != std::string::npos) {
            chosen = &rule;
            break;
        }
    }
    if (!chosen) {
        ++unmatched_;
        std::string snippet = last_user.substr(0, 120);
        return Error{"scripted backend: no rule matches last user message: \"" +
                     snippet + "\""};
    }

    std::vector<const Rule*> same;
    for (const auto& rule : rules_) {
        if (rule.needle == chosen->needle) same.push_back(&rule);
    }
    std::size_t n = consumed_[chosen->needle]++;
    if (n >= same.size()) n = same.size() - 1;
    const Rule* answer = same[n];

    std::size_t prompt_bytes = 0;
    for (const auto& m : messages) prompt_bytes += m.content.size();
    Completion out;
    out.content = answer->response;
    out.usage.prompt_tokens =
        static_cast<std::int64_t>((prompt_bytes + 3) / 4);
    out.usage.completion_tokens =
        static_cast<std::int64_t>((answer->response.size() + 3) / 4);
    return out;
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

const char* to_string(Stage s) {
    switch (s) {
        case Stage::categorize: return "categorize";
        case Stage::decompose: return "decompose";
        case Stage::instantiate: return "instantiate";
        case Stage::generate: return "generate";
        case Stage::correct: return "correct";
        case Stage::summarize: return "summarize";
        case Stage::paraphrase: return "paraphrase";
        case Stage::judge: return "judge";
    }
    return "unknown";
}

Gateway::Gateway(Backend& backend, std::string model)
    : backend_(backend), model_(std::move(model)) {}

Result<Completion> Gateway::complete(Stage stage,
                                     const std::vector<Message>& messages) {
    auto& bucket = by_stage_[stage];
    bucket.calls += 1;
    auto res = backend_.complete(model_, messages);
    if (res) {
        bucket.usage += res->usage;
    }
    return res;
}

Usage Gateway::total_usage() const {
    Usage total;
    for (const auto& [stage, su] : by_stage_) total += su.usage;
    return total;
}

std::int64_t Gateway::total_calls() const {
    std::int64_t calls = 0;
    for (const auto& [stage, su] : by_stage_) calls += su.calls;
    return calls;
}

std::string Gateway::usage_report() const {
    std::ostringstream out;
    out << std::left << std::setw(12) << "stage" << std::right << std::setw(7)
        << "calls" << std::setw(9) << "prompt" << std::setw(12) << "completion"
        << std::setw(8) << "total" << '\n';
    auto line = [&out](const std::string& name, const StageUsage& su) {
        out << std::left << std::setw(12) << name << std::right << std::setw(7)
            << su.calls << std::setw(9) << su.usage.prompt_tokens
            << std::setw(12) << su.usage.completion_tokens << std::setw(8)
            << su.usage.total() << '\n';
    };
    for (const auto& [stage, su] : by_stage_) line(to_string(stage), su);
    StageUsage total{total_usage(), total_calls()};
    line("total", total);
    return out.str();
}

}  // namespace polyg::llm

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "polyg/core/result.hpp"

namespace polyg::llm {

struct Message {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
    bool operator==(const Message&) const = default;
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total() const { return prompt_tokens + completion_tokens; }
    Usage& operator+=(const Usage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

struct Completion {
    std::string content;
    Usage usage;
};

// Request identity: 16 hex digits over the model name and the messages
// with whitespace-collapsed content. Two requests that differ only in
// formatting whitespace replay the same recording.
std::string fingerprint(const std::string& model,
                        const std::vector<Message>& messages);

class Backend {
public:
    virtual ~Backend() = default;
    virtual Result<Completion> complete(const std::string& model,
                                        const std::vector<Message>& messages) = 0;
    // True when completions are served from a recording (no network, no
    // latency worth reporting).
    virtual bool replaying() const { return false; }
};

// ---------------------------------------------------------------------------
// Live backend: OpenAI-style chat completions over HTTP.
// ---------------------------------------------------------------------------

class LiveBackend : public Backend {
public:
    struct Config {
        std::string base_url;  // e.g. https://api.example.com/v1
        std::string api_key;
        // Transport retries on connect failures and 5xx, at most this many
        // extra attempts, with linear backoff between them.
        int max_retries = 2;
        std::chrono::milliseconds backoff{250};
    };

    // Reads LLM_BASE_URL and LLM_API_KEY. Base URL defaults to the OpenAI
    // endpoint; a missing key is an error at request time, not here.
    static Config config_from_env();

    // Raw POST of a JSON body to {base_url}/chat/completions, returning the
    // response body. Swappable so tests can run without a network.
    using Transport =
        std::function<Result<std::string>(const Config&, const std::string& body)>;

    explicit LiveBackend(Config config);
    LiveBackend(Config config, Transport transport);

    Result<Completion> complete(const std::string& model,
                                const std::vector<Message>& messages) override;

private:
    Config config_;
    Transport transport_;
};

// Default model name: LLM_MODEL or a stable placeholder.
std::string model_from_env();

// ---------------------------------------------------------------------------
// Record / replay cassettes (line-delimited JSON)
// ---------------------------------------------------------------------------

// Wraps another backend and appends every completion to a cassette file:
// {"fingerprint", "model", "messages", "content", "usage", "recorded_at"}.
class RecordBackend : public Backend {
public:
    // Truncates the file when append is false.
    static Result<std::unique_ptr<RecordBackend>> open(Backend& inner,
                                                       const std::string& path,
                                                       bool append = false);

    Result<Completion> complete(const std::string& model,
                                const std::vector<Message>& messages) override;

private:
    RecordBackend(Backend& inner, std::string path);
    Backend& inner_;
    std::string path_;
};

// Serves completions from a cassette, touching no network. A request whose
// fingerprint was never recorded is an error naming that fingerprint.
class ReplayBackend : public Backend {
public:
    static Result<std::unique_ptr<ReplayBackend>> open(const std::string& path);

    Result<Completion> complete(const std::string& model,
                                const std::vector<Message>& messages) override;
    bool replaying() const override { return true; }

    std::size_t size() const { return entries_.size(); }

private:
    ReplayBackend() = default;
    std::string path_;
    std::map<std::string, Completion> entries_;
};

// ---------------------------------------------------------------------------
// Scripted backend (test and fixture support)
// ---------------------------------------------------------------------------

// Answers from substring rules against the last user message. Deterministic
// synthetic usage is derived from the byte lengths, so recordings made from
// scripts are stable.
class ScriptedBackend : public Backend {
public:
    struct Rule {
        std::string needle;  // substring of the last user message
        std::string response;
    };

    void add(std::string needle, std::string response);
    // Responses consumed in order for identical needles; the last one
    // sticks for any further matches.
    Result<Completion> complete(const std::string& model,
                                const std::vector<Message>& messages) override;

    std::size_t unmatched_calls() const { return unmatched_; }

private:
    std::vector<Rule> rules_;
    std::map<std::string, std::size_t> consumed_;
    std::size_t unmatched_ = 0;
};

// ---------------------------------------------------------------------------
// Gateway: stage accounting over a backend
// ---------------------------------------------------------------------------

enum class Stage {
    categorize,
    decompose,
    instantiate,
    generate,
    correct,
    summarize,
    paraphrase,
    judge,
};

const char* to_string(Stage s);

struct StageUsage {
    Usage usage;
    std::int64_t calls = 0;
};

// Every model call flows through here tagged with its pipeline stage, so
// cost breaks down by stage regardless of the backend behind it.
class Gateway {
public:
    Gateway(Backend& backend, std::string model);

    Result<Completion> complete(Stage stage, const std::vector<Message>& messages);

    const std::string& model() const { return model_; }
    bool replaying() const { return backend_.replaying(); }

    const std::map<Stage, StageUsage>& usage_by_stage() const { return by_stage_; }
    Usage total_usage() const;
    std::int64_t total_calls() const;

    // Fixed-width per-stage table with a totals line.
    std::string usage_report() const;

private:
    Backend& backend_;
    std::string model_;
    std::map<Stage, StageUsage> by_stage_;
};

}  // namespace polyg::llm

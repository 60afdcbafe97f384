#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "dv/clock.hpp"

namespace dv {

// Pipeline stage a completion request belongs to. The six verifier-stage
// tags are the only ones that ever appear in persisted bundles; `policy` is
// used by the gateway-llm solving-agent binding so its calls can ride the
// same cassettes.
enum class StageTag { summarize, identify, followup, verify, judge, feedback, policy };

std::string to_string(StageTag tag);
StageTag stage_tag_from_string(std::string_view s);

enum class DecodeMode { deterministic, sampled };

struct Decode {
    DecodeMode mode = DecodeMode::deterministic;
    double temperature = 0.0;  // sampled mode only
    std::uint64_t seed = 0;    // sampled mode only
};

struct CompletionRequest {
    std::string system;
    std::string user;
    int max_output = 4096;
    Decode decode;
    StageTag tag = StageTag::judge;
};

enum class FinishReason { stop, length, error };

std::string to_string(FinishReason r);
FinishReason finish_reason_from_string(std::string_view s);

struct Completion {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
    std::string backend_id;
};

// Digest used for scripted matching and cassette lookup: hex FNV-1a of the
// user text.
std::string request_digest(const CompletionRequest& request);

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual Completion complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend: deterministic canned responses for tests and offline
// runs. Matches on (tag, digest of user text); an optional per-tag default
// answers anything else. Referentially transparent: same request, same
// completion.
// ---------------------------------------------------------------------------

struct ScriptedReply {
    std::string text;
    FinishReason finish = FinishReason::stop;
};

class ScriptedBackend : public Gateway {
public:
    void script_user(StageTag tag, const std::string& user_text, ScriptedReply reply);
    void script_digest(StageTag tag, const std::string& digest, ScriptedReply reply);
    void set_default(StageTag tag, ScriptedReply reply);

    Completion complete(const CompletionRequest& request) override;

    int calls(StageTag tag) const;
    int total_calls() const;

    // {"defaults": {"judge": "..."}, "entries": [{"tag","user"|"digest","text"}]}
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    std::map<std::pair<StageTag, std::string>, ScriptedReply> entries_;
    std::map<StageTag, ScriptedReply> defaults_;
    std::map<StageTag, int> calls_;
};

// ---------------------------------------------------------------------------
// Live backend: OpenAI-style chat-completions over HTTP, with bounded
// retries (transport errors and 429/5xx only) and exponential backoff on an
// injectable clock. The transport is abstract so the retry schedule is
// testable without a network.
// ---------------------------------------------------------------------------

struct HttpResult {
    int status = 0;
    std::string body;
    bool transport_error = false;
    bool timed_out = false;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post_json(const std::string& body) = 0;
};

// POSTs to <base_url>/chat/completions with a bearer token.
std::shared_ptr<HttpTransport> make_live_transport(const std::string& base_url,
                                                   const std::string& api_key,
                                                   std::chrono::seconds timeout);

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_backoff{250};
};

struct HttpBackendOptions {
    std::string model;
    RetryPolicy retry;
    int inflight_cap = 4;
};

class HttpBackend : public Gateway {
public:
    HttpBackend(std::shared_ptr<HttpTransport> transport, HttpBackendOptions options,
                std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());

    Completion complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<HttpTransport> transport_;
    HttpBackendOptions options_;
    std::shared_ptr<Clock> clock_;
    std::counting_semaphore<256> inflight_;
};

// ---------------------------------------------------------------------------
// Cassettes: record/replay of completions as JSONL
// {tag, digest, request_excerpt, completion}.
// ---------------------------------------------------------------------------

class RecordingGateway : public Gateway {
public:
    RecordingGateway(std::shared_ptr<Gateway> inner, std::filesystem::path cassette_path);
    Completion complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<Gateway> inner_;
    std::filesystem::path path_;
    std::mutex mu_;
};

class ReplayGateway : public Gateway {
public:
    explicit ReplayGateway(const std::filesystem::path& cassette_path);
    Completion complete(const CompletionRequest& request) override;
    size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<StageTag, std::string>, Completion> entries_;
};

// Spec-shaped helpers for the two cassette modes.
std::shared_ptr<Gateway> record_to_cassette(std::shared_ptr<Gateway> live,
                                            const std::filesystem::path& cassette_path);
std::shared_ptr<Gateway> replay_from_cassette(const std::filesystem::path& cassette_path);

// ---------------------------------------------------------------------------
// Call log: captures every (request, completion) made through it. One
// instance per verification run feeds the bundle's recorded calls.
// ---------------------------------------------------------------------------

struct LoggedCall {
    CompletionRequest request;
    Completion completion;
};

class LoggingGateway : public Gateway {
public:
    explicit LoggingGateway(Gateway& inner) : inner_(inner) {}
    Completion complete(const CompletionRequest& request) override;
    const std::vector<LoggedCall>& calls() const { return calls_; }

private:
    Gateway& inner_;
    std::vector<LoggedCall> calls_;
    std::mutex mu_;
};

// One-shot format reminder appended to the user text when a stage parser
// rejects the first completion.
extern const char* kFormatReminder;

}  // namespace dv

#include "dv/gateway.hpp"

#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dv/digest.hpp"
#include "dv/error.hpp"
#include "dv/model.hpp"

namespace dv {

const char* kFormatReminder = "Your previous response violated the required format.";

std::string to_string(StageTag tag) {
    switch (tag) {
        case StageTag::summarize: return "summarize";
        case StageTag::identify: return "identify";
        case StageTag::followup: return "followup";
        case StageTag::verify: return "verify";
        case StageTag::judge: return "judge";
        case StageTag::feedback: return "feedback";
        case StageTag::policy: return "policy";
    }
    return "judge";
}

StageTag stage_tag_from_string(std::string_view s) {
    if (s == "summarize") return StageTag::summarize;
    if (s == "identify") return StageTag::identify;
    if (s == "followup") return StageTag::followup;
    if (s == "verify") return StageTag::verify;
    if (s == "judge") return StageTag::judge;
    if (s == "feedback") return StageTag::feedback;
    if (s == "policy") return StageTag::policy;
    throw SchemaError("stage tag: unknown value '" + std::string(s) + "'");
}

std::string to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "stop";
}

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    if (s == "error") return FinishReason::error;
    throw SchemaError("finish_reason: unknown value '" + std::string(s) + "'");
}

std::string request_digest(const CompletionRequest& request) {
    return digest_hex(request.user);
}

// --------------------------------------------------------------------------
// ScriptedBackend
// --------------------------------------------------------------------------

void ScriptedBackend::script_user(StageTag tag, const std::string& user_text,
                                  ScriptedReply reply) {
    std::lock_guard lock(mu_);
    entries_[{tag, digest_hex(user_text)}] = std::move(reply);
}

void ScriptedBackend::script_digest(StageTag tag, const std::string& digest,
                                    ScriptedReply reply) {
    std::lock_guard lock(mu_);
    entries_[{tag, digest}] = std::move(reply);
}

void ScriptedBackend::set_default(StageTag tag, ScriptedReply reply) {
    std::lock_guard lock(mu_);
    defaults_[tag] = std::move(reply);
}

Completion ScriptedBackend::complete(const CompletionRequest& request) {
    std::lock_guard lock(mu_);
    calls_[request.tag]++;
    const std::string digest = request_digest(request);
    const ScriptedReply* reply = nullptr;
    if (auto it = entries_.find({request.tag, digest}); it != entries_.end())
        reply = &it->second;
    else if (auto dit = defaults_.find(request.tag); dit != defaults_.end())
        reply = &dit->second;
    if (reply == nullptr)
        throw GatewayError(GatewayError::Kind::unscripted,
                           "unscripted request: tag=" + to_string(request.tag) +
                               " digest=" + digest);
    Completion c;
    c.text = reply->text;
    c.finish_reason = reply->finish;
    c.latency_ms = 0;
    c.backend_id = "scripted";
    return c;
}

int ScriptedBackend::calls(StageTag tag) const {
    std::lock_guard lock(mu_);
    auto it = calls_.find(tag);
    return it == calls_.end() ? 0 : it->second;
}

int ScriptedBackend::total_calls() const {
    std::lock_guard lock(mu_);
    int n = 0;
    for (const auto& [tag, count] : calls_) n += count;
    return n;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("script file not readable: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("script file: invalid JSON: ") + e.what());
    }
    auto backend = std::make_shared<ScriptedBackend>();
    if (auto it = doc.find("defaults"); it != doc.end()) {
        for (const auto& [tag, text] : it->items())
            backend->set_default(stage_tag_from_string(tag), {text.get<std::string>()});
    }
    if (auto it = doc.find("entries"); it != doc.end()) {
        for (const auto& e : *it) {
            StageTag tag = stage_tag_from_string(e.at("tag").get<std::string>());
            ScriptedReply reply{e.at("text").get<std::string>()};
            if (e.contains("finish"))
                reply.finish = finish_reason_from_string(e["finish"].get<std::string>());
            if (e.contains("digest"))
                backend->script_digest(tag, e["digest"].get<std::string>(), reply);
            else
                backend->script_user(tag, e.at("user").get<std::string>(), reply);
        }
    }
    return backend;
}

// --------------------------------------------------------------------------
// HttpBackend
// --------------------------------------------------------------------------

namespace {

class LiveTransport : public HttpTransport {
public:
    LiveTransport(std::string base_url, std::string api_key, std::chrono::seconds timeout)
        : base_url_(std::move(base_url)), api_key_(std::move(api_key)), timeout_(timeout) {}

    HttpResult post_json(const std::string& body) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(timeout_.count(), 0);
        client.set_read_timeout(timeout_.count(), 0);
        client.set_write_timeout(timeout_.count(), 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post("/chat/completions", headers, body, "application/json");
        HttpResult out;
        if (!res) {
            out.transport_error = true;
            auto err = res.error();
            out.timed_out = err == httplib::Error::ConnectionTimeout ||
                            err == httplib::Error::Read || err == httplib::Error::Write;
            out.error = httplib::to_string(err);
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }

private:
    std::string base_url_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

bool retryable(const HttpResult& r) {
    if (r.transport_error) return true;
    return r.status == 429 || (r.status >= 500 && r.status < 600);
}

Completion parse_chat_completion(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw GatewayError(GatewayError::Kind::http,
                           std::string("malformed completion response: ") + e.what());
    }
    try {
        const auto& choice = doc.at("choices").at(0);
        Completion c;
        c.text = choice.at("message").at("content").get<std::string>();
        std::string finish = choice.value("finish_reason", "stop");
        if (finish == "stop")
            c.finish_reason = FinishReason::stop;
        else if (finish == "length")
            c.finish_reason = FinishReason::length;
        else
            c.finish_reason = FinishReason::error;
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayError::Kind::http,
                           std::string("malformed completion response: ") + e.what());
    }
}

}  // namespace

std::shared_ptr<HttpTransport> make_live_transport(const std::string& base_url,
                                                   const std::string& api_key,
                                                   std::chrono::seconds timeout) {
    return std::make_shared<LiveTransport>(base_url, api_key, timeout);
}

HttpBackend::HttpBackend(std::shared_ptr<HttpTransport> transport, HttpBackendOptions options,
                         std::shared_ptr<Clock> clock)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      clock_(std::move(clock)),
      inflight_(options_.inflight_cap > 0 ? options_.inflight_cap : 1) {}

Completion HttpBackend::complete(const CompletionRequest& request) {
    nlohmann::json body{
        {"model", options_.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system}},
          {{"role", "user"}, {"content", request.user}}}},
        {"max_tokens", request.max_output},
    };
    if (request.decode.mode == DecodeMode::deterministic) {
        body["temperature"] = 0.0;
    } else {
        body["temperature"] = request.decode.temperature;
        body["seed"] = request.decode.seed;
    }
    const std::string payload = body.dump();

    inflight_.acquire();
    struct Release {
        std::counting_semaphore<256>& sem;
        ~Release() { sem.release(); }
    } release{inflight_};

    HttpResult last;
    auto backoff = options_.retry.base_backoff;
    const auto started = clock_->now();
    for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
        last = transport_->post_json(payload);
        if (!last.transport_error && last.status == 200) {
            Completion c = parse_chat_completion(last.body);
            c.latency_ms = (clock_->now() - started).count();
            c.backend_id = options_.model.empty() ? "live" : "live:" + options_.model;
            return c;
        }
        if (!retryable(last) || attempt == options_.retry.max_attempts) break;
        clock_->sleep_for(backoff);
        backoff *= 2;
    }

    if (last.transport_error && last.timed_out)
        throw GatewayError(GatewayError::Kind::timeout, "request timed out: " + last.error);
    if (last.transport_error)
        throw GatewayError(GatewayError::Kind::transport, "transport error: " + last.error);
    throw GatewayError(GatewayError::Kind::http,
                       "HTTP " + std::to_string(last.status) + ": " +
                           last.body.substr(0, 200));
}

// --------------------------------------------------------------------------
// Cassettes
// --------------------------------------------------------------------------

namespace {

nlohmann::json completion_to_json(const Completion& c) {
    return {{"text", c.text},
            {"finish_reason", to_string(c.finish_reason)},
            {"latency_ms", c.latency_ms},
            {"backend_id", c.backend_id}};
}

Completion completion_from_json(const nlohmann::json& doc) {
    Completion c;
    c.text = doc.at("text").get<std::string>();
    c.finish_reason = finish_reason_from_string(doc.at("finish_reason").get<std::string>());
    c.latency_ms = doc.value("latency_ms", 0);
    c.backend_id = doc.value("backend_id", "");
    return c;
}

}  // namespace

RecordingGateway::RecordingGateway(std::shared_ptr<Gateway> inner,
                                   std::filesystem::path cassette_path)
    : inner_(std::move(inner)), path_(std::move(cassette_path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

Completion RecordingGateway::complete(const CompletionRequest& request) {
    Completion c = inner_->complete(request);
    nlohmann::json entry{{"tag", to_string(request.tag)},
                         {"digest", request_digest(request)},
                         {"request_excerpt", request.user.substr(0, 120)},
                         {"completion", completion_to_json(c)}};
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw StoreError("cassette not writable: " + path_.string());
    out << entry.dump() << "\n";
    return c;
}

ReplayGateway::ReplayGateway(const std::filesystem::path& cassette_path) {
    std::ifstream in(cassette_path);
    if (!in) throw StoreError("cassette not readable: " + cassette_path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json entry;
        try {
            entry = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw StoreError("cassette line " + std::to_string(lineno) + ": " + e.what());
        }
        auto tag = stage_tag_from_string(entry.at("tag").get<std::string>());
        entries_[{tag, entry.at("digest").get<std::string>()}] =
            completion_from_json(entry.at("completion"));
    }
}

Completion ReplayGateway::complete(const CompletionRequest& request) {
    auto it = entries_.find({request.tag, request_digest(request)});
    if (it == entries_.end())
        throw GatewayError(GatewayError::Kind::cassette_miss,
                           "cassette miss: tag=" + to_string(request.tag) +
                               " digest=" + request_digest(request));
    return it->second;
}

std::shared_ptr<Gateway> record_to_cassette(std::shared_ptr<Gateway> live,
                                            const std::filesystem::path& cassette_path) {
    return std::make_shared<RecordingGateway>(std::move(live), cassette_path);
}

std::shared_ptr<Gateway> replay_from_cassette(const std::filesystem::path& cassette_path) {
    return std::make_shared<ReplayGateway>(cassette_path);
}

Completion LoggingGateway::complete(const CompletionRequest& request) {
    Completion c = inner_.complete(request);
    std::lock_guard lock(mu_);
    calls_.push_back(LoggedCall{request, c});
    return c;
}

}  // namespace dv

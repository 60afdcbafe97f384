#include "dv/verifier.hpp"

#include <nlohmann/json.hpp>

#include "dv/error.hpp"
#include "dv/subprocess.hpp"

namespace dv {

namespace {

// First paragraph is the explanation, the remainder the answer; without a
// blank-line split the whole text is the answer.
void split_explanation_answer(const std::string& text, FollowUpAnswer& out) {
    std::string t = trim(text);
    size_t split = t.find("\n\n");
    if (split == std::string::npos) {
        out.explanation.clear();
        out.answer = t;
        return;
    }
    out.explanation = trim(t.substr(0, split));
    out.answer = trim(t.substr(split + 2));
    if (out.answer.empty()) {
        out.answer = out.explanation;
        out.explanation.clear();
    }
}

FollowUpAnswer degraded(const FollowUpPair& pair, std::string agent_id, std::string reason) {
    FollowUpAnswer a;
    a.pair = pair;
    a.agent_id = std::move(agent_id);
    a.answer = kUnavailableAnswer;
    a.degraded = true;
    a.error = std::move(reason);
    return a;
}

}  // namespace

GatewayResearchAgent::GatewayResearchAgent(Gateway& gateway, const PromptLibrary& prompts)
    : gateway_(gateway), prompts_(prompts) {}

FollowUpAnswer GatewayResearchAgent::answer(const Task& task, const FollowUpPair& pair) {
    CompletionRequest request;
    request.system = make_system_prompt(task);
    request.tag = StageTag::verify;
    request.user = PromptLibrary::render(prompts_.text(PromptId::verify),
                                         {{"{source}", pair.source},
                                          {"{question}", pair.question}});
    try {
        Completion c = gateway_.complete(request);
        FollowUpAnswer a;
        a.pair = pair;
        a.agent_id = "gateway-llm";
        split_explanation_answer(c.text, a);
        if (a.answer.empty()) return degraded(pair, "gateway-llm", "empty completion");
        return a;
    } catch (const GatewayError& e) {
        // Fixture problems (unscripted, cassette miss) must surface; live
        // failures degrade so judging continues.
        if (e.kind() == GatewayError::Kind::unscripted ||
            e.kind() == GatewayError::Kind::cassette_miss)
            throw;
        return degraded(pair, "gateway-llm", e.what());
    }
}

CommandResearchAgent::CommandResearchAgent(std::string command, std::chrono::seconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

FollowUpAnswer CommandResearchAgent::answer(const Task& task, const FollowUpPair& pair) {
    (void)task;
    nlohmann::json request{{"source", pair.source}, {"question", pair.question}};
    CommandResult result = run_command(command_, request.dump(),
                                       std::chrono::duration_cast<std::chrono::milliseconds>(
                                           timeout_));
    if (result.timed_out) return degraded(pair, "external-command", "timeout");
    if (result.exit_code != 0)
        return degraded(pair, "external-command",
                        "exit code " + std::to_string(result.exit_code));
    try {
        auto doc = nlohmann::json::parse(result.out);
        FollowUpAnswer a;
        a.pair = pair;
        a.agent_id = "external-command";
        a.explanation = doc.value("explanation", "");
        a.answer = doc.at("answer").get<std::string>();
        if (a.answer.empty()) return degraded(pair, "external-command", "empty answer");
        return a;
    } catch (const nlohmann::json::exception& e) {
        return degraded(pair, "external-command", std::string("malformed response: ") + e.what());
    }
}

void ScriptedResearchAgent::script(const std::string& question, const std::string& explanation,
                                   const std::string& answer) {
    replies_[question] = {explanation, answer};
}

void ScriptedResearchAgent::set_default(const std::string& explanation,
                                        const std::string& answer) {
    default_reply_ = {explanation, answer};
    has_default_ = true;
}

FollowUpAnswer ScriptedResearchAgent::answer(const Task& task, const FollowUpPair& pair) {
    (void)task;
    invocations_.push_back(pair.question);
    if (!fail_marker_.empty() && pair.question.find(fail_marker_) != std::string::npos)
        return degraded(pair, "scripted", "scripted failure");
    const std::pair<std::string, std::string>* reply = nullptr;
    if (auto it = replies_.find(pair.question); it != replies_.end())
        reply = &it->second;
    else if (has_default_)
        reply = &default_reply_;
    if (reply == nullptr) return degraded(pair, "scripted", "no scripted reply");
    FollowUpAnswer a;
    a.pair = pair;
    a.agent_id = "scripted";
    a.explanation = reply->first;
    a.answer = reply->second;
    return a;
}

std::vector<FollowUpAnswer> run_all(const Task& task, const std::vector<FollowUpPair>& pairs,
                                    ResearchAgent& agent) {
    if (pairs.size() > static_cast<size_t>(kMaxFollowUps))
        throw Error("run_all: more than " + std::to_string(kMaxFollowUps) + " follow-up pairs");
    std::vector<FollowUpAnswer> answers;
    answers.reserve(pairs.size());
    for (const auto& pair : pairs) answers.push_back(agent.answer(task, pair));
    return answers;
}

}  // namespace dv

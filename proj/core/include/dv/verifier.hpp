#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dv/decomposer.hpp"
#include "dv/gateway.hpp"
#include "dv/model.hpp"
#include "dv/prompts.hpp"

namespace dv {

// Placeholder answer recorded when evidence gathering fails; judging
// continues with the flag set.
inline constexpr const char* kUnavailableAnswer = "[unavailable]";

struct FollowUpAnswer {
    FollowUpPair pair;
    std::string explanation;
    std::string answer;
    std::string agent_id;
    bool degraded = false;
    std::string error;  // reason, when degraded
};

// Evidence gathering is delegated: an LLM call, an external command speaking
// JSON over stdin/stdout, or scripted fixtures.
class ResearchAgent {
public:
    virtual ~ResearchAgent() = default;
    virtual FollowUpAnswer answer(const Task& task, const FollowUpPair& pair) = 0;
};

class GatewayResearchAgent : public ResearchAgent {
public:
    GatewayResearchAgent(Gateway& gateway, const PromptLibrary& prompts);
    FollowUpAnswer answer(const Task& task, const FollowUpPair& pair) override;

private:
    Gateway& gateway_;
    const PromptLibrary& prompts_;
};

// Protocol: request {"source","question"} on stdin; response
// {"explanation","answer"} on stdout; exit 0. Nonzero exit, timeout, or a
// malformed response degrade the answer instead of failing the pipeline.
class CommandResearchAgent : public ResearchAgent {
public:
    CommandResearchAgent(std::string command,
                         std::chrono::seconds timeout = std::chrono::seconds(300));
    FollowUpAnswer answer(const Task& task, const FollowUpPair& pair) override;

private:
    std::string command_;
    std::chrono::seconds timeout_;
};

class ScriptedResearchAgent : public ResearchAgent {
public:
    void script(const std::string& question, const std::string& explanation,
                const std::string& answer);
    void set_default(const std::string& explanation, const std::string& answer);
    // Questions containing this marker behave like a failed command.
    void fail_if_contains(const std::string& marker) { fail_marker_ = marker; }

    FollowUpAnswer answer(const Task& task, const FollowUpPair& pair) override;

    const std::vector<std::string>& invocations() const { return invocations_; }

private:
    std::map<std::string, std::pair<std::string, std::string>> replies_;
    std::pair<std::string, std::string> default_reply_;
    bool has_default_ = false;
    std::string fail_marker_;
    std::vector<std::string> invocations_;
};

// Answers pairs strictly in order, one at a time. Degraded answers carry
// their flag; nothing fatal propagates.
std::vector<FollowUpAnswer> run_all(const Task& task, const std::vector<FollowUpPair>& pairs,
                                    ResearchAgent& agent);

}  // namespace dv

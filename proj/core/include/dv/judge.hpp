#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dv/decomposer.hpp"
#include "dv/gateway.hpp"
#include "dv/model.hpp"
#include "dv/prompts.hpp"
#include "dv/verifier.hpp"

namespace dv {

struct Judgment {
    std::string explanation;
    int score = 1;
    Verdict verdict;
};

inline constexpr int kMaxInstructions = 3;

struct Feedback {
    std::string reflection;
    std::vector<std::string> instructions;  // 1..3
    std::optional<std::string> suggested_answer;
};

// One prompt/completion exchange recorded for the bundle (and later SFT
// curation). Prompts are stored fully instantiated.
struct RecordedCall {
    StageTag tag = StageTag::judge;
    std::string system;
    std::string user;
    std::string response;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
    std::string backend_id;
};

// One complete verification run over (task, answer, trajectory).
struct VerificationBundle {
    std::string task_id;
    std::string answer;
    TrajectorySummary summary;
    std::vector<SuspicionPair> suspicions;
    std::vector<FollowUpPair> followups;
    std::vector<FollowUpAnswer> followup_answers;
    Judgment judgment;
    std::optional<Feedback> feedback;  // present iff verdict = reject
    std::vector<RecordedCall> calls;
    std::map<std::string, std::int64_t> stage_timings_ms;
    int gateway_calls = 0;
    bool synthetic = false;  // forced-reject bundle from a policy failure
};

class JudgeAgent {
public:
    JudgeAgent(Gateway& gateway, const PromptLibrary& prompts);

    // One judge call; the score line is parsed via the last well-formed
    // Explanation/Score pair.
    Judgment judge(const Task& task, const std::string& answer, const TrajectorySummary& summary,
                   const std::vector<FollowUpAnswer>& followup_answers) const;

    // Only meaningful after a reject verdict.
    Feedback feedback(const Task& task, const std::string& wrong_answer,
                      const TrajectorySummary& summary,
                      const std::vector<FollowUpAnswer>& followup_answers) const;

private:
    Gateway& gateway_;
    const PromptLibrary& prompts_;
};

// Rendering of the follow-up Q/A block shared by judge and feedback prompts.
// Degraded answers appear verbatim with their flag.
std::string render_followup_answers(const std::vector<FollowUpAnswer>& answers);

// Validates cross-part invariants and computes stage timings / call counts.
VerificationBundle assemble_bundle(std::string task_id, std::string answer,
                                   TrajectorySummary summary,
                                   std::vector<SuspicionPair> suspicions,
                                   std::vector<FollowUpPair> pairs,
                                   std::vector<FollowUpAnswer> answers, Judgment judgment,
                                   std::optional<Feedback> feedback,
                                   std::vector<RecordedCall> calls, bool synthetic = false);

nlohmann::json serialize(const VerificationBundle& bundle);
VerificationBundle parse_bundle(const nlohmann::json& doc);

}  // namespace dv

#include "dv/pipeline.hpp"

#include "dv/error.hpp"

namespace dv {

VerifierPipeline::VerifierPipeline(std::shared_ptr<Gateway> gateway, PromptLibrary prompts,
                                   FailureTaxonomy taxonomy,
                                   std::shared_ptr<ResearchAgent> research,
                                   DecomposerOptions options)
    : gateway_(std::move(gateway)),
      prompts_(std::move(prompts)),
      taxonomy_(std::move(taxonomy)),
      research_(std::move(research)),
      options_(options) {
    if (!gateway_) throw ConfigError("pipeline: gateway is required");
    if (!research_) throw ConfigError("pipeline: research agent binding is required");
}

VerificationBundle VerifierPipeline::verify(const Task& task, const std::string& answer,
                                            const Trajectory& trajectory) {
    if (answer.empty()) throw Error("verify: answer must be non-empty");

    LoggingGateway log(*gateway_);
    Decomposer decomposer(log, prompts_, taxonomy_, options_);
    JudgeAgent judge_agent(log, prompts_);

    TrajectorySummary summary = decomposer.summarize_trajectory(task, trajectory);
    std::vector<SuspicionPair> suspicions = decomposer.identify_errors(task, summary);
    std::vector<FollowUpPair> followups =
        decomposer.formulate_followups(task, answer, summary, suspicions);
    std::vector<FollowUpAnswer> answers = run_all(task, followups, *research_);

    Judgment judgment = judge_agent.judge(task, answer, summary, answers);
    std::optional<Feedback> feedback;
    if (judgment.verdict.label == VerdictLabel::reject)
        feedback = judge_agent.feedback(task, answer, summary, answers);

    std::vector<RecordedCall> calls;
    calls.reserve(log.calls().size());
    for (const auto& logged : log.calls()) {
        calls.push_back(RecordedCall{logged.request.tag, logged.request.system,
                                     logged.request.user, logged.completion.text,
                                     logged.completion.finish_reason,
                                     logged.completion.latency_ms,
                                     logged.completion.backend_id});
    }

    return assemble_bundle(task.id, answer, std::move(summary), std::move(suspicions),
                           std::move(followups), std::move(answers), std::move(judgment),
                           std::move(feedback), std::move(calls));
}

VerificationBundle make_synthetic_reject_bundle(const Task& task, const std::string& answer) {
    Judgment judgment;
    judgment.explanation = "The solving agent failed to produce an answer for this round.";
    judgment.score = 1;
    judgment.verdict = verdict_of(1);

    Feedback feedback;
    feedback.reflection = "The previous attempt did not produce a usable answer.";
    feedback.instructions = {"retry the task"};

    return assemble_bundle(task.id, answer, TrajectorySummary{}, {}, {}, {},
                           std::move(judgment), std::move(feedback), {}, /*synthetic=*/true);
}

}  // namespace dv

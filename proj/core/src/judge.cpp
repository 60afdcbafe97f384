#include "dv/judge.hpp"

#include <sstream>

#include "dv/error.hpp"
#include "dv/parsers.hpp"

namespace dv {

namespace {

template <typename Parse>
auto call_with_format_retry(Gateway& gateway, CompletionRequest request, const char* stage,
                            Parse parse) {
    Completion first = gateway.complete(request);
    try {
        return parse(first.text);
    } catch (const ParseError&) {
        request.user += std::string("\n\n") + kFormatReminder;
        Completion second = gateway.complete(request);
        try {
            return parse(second.text);
        } catch (const ParseError& e) {
            throw StageError(stage, e.what());
        }
    }
}

std::string render_inputs_block(const char* answer_label, const std::string& answer,
                                const TrajectorySummary& summary,
                                const std::vector<FollowUpAnswer>& followup_answers) {
    std::ostringstream out;
    out << answer_label << ":\n" << answer << "\n\n";
    out << "Trajectory summary:\n" << render_summary(summary);
    out << "\nAdditional questions and answers:\n";
    if (followup_answers.empty())
        out << "(none)\n";
    else
        out << render_followup_answers(followup_answers);
    return out.str();
}

}  // namespace

std::string render_followup_answers(const std::vector<FollowUpAnswer>& answers) {
    std::ostringstream out;
    int n = 0;
    for (const auto& a : answers) {
        ++n;
        out << "Source " << n << ": " << a.pair.source << "\n";
        out << "Question " << n << ": " << a.pair.question << "\n";
        if (!a.explanation.empty()) out << "Explanation " << n << ": " << a.explanation << "\n";
        out << "Answer " << n << ": " << a.answer;
        if (a.degraded) out << " (evidence unavailable: " << a.error << ")";
        out << "\n";
    }
    return out.str();
}

JudgeAgent::JudgeAgent(Gateway& gateway, const PromptLibrary& prompts)
    : gateway_(gateway), prompts_(prompts) {}

Judgment JudgeAgent::judge(const Task& task, const std::string& answer,
                           const TrajectorySummary& summary,
                           const std::vector<FollowUpAnswer>& followup_answers) const {
    if (answer.empty()) throw Error("judge: answer must be non-empty");

    CompletionRequest request;
    request.system = make_system_prompt(task);
    request.tag = StageTag::judge;
    request.user = prompts_.text(PromptId::judge) + "\n\n" +
                   render_inputs_block("Unverified answer", answer, summary, followup_answers);

    RawJudgment raw = call_with_format_retry(gateway_, request, "judge", parse_judgment);
    Judgment judgment;
    judgment.explanation = raw.explanation;
    judgment.score = raw.score;
    judgment.verdict = verdict_of(raw.score);
    return judgment;
}

namespace {

// Captures the text following the literal pattern "the answer is" in the
// first instruction that carries it.
std::optional<std::string> extract_suggested_answer(const std::vector<std::string>& instructions) {
    static const std::string pattern = "the answer is";
    for (const auto& ins : instructions) {
        size_t pos = ins.find(pattern);
        if (pos == std::string::npos) continue;
        std::string rest = trim(ins.substr(pos + pattern.size()));
        if (!rest.empty()) return rest;
    }
    return std::nullopt;
}

}  // namespace

Feedback JudgeAgent::feedback(const Task& task, const std::string& wrong_answer,
                              const TrajectorySummary& summary,
                              const std::vector<FollowUpAnswer>& followup_answers) const {
    CompletionRequest request;
    request.system = make_system_prompt(task);
    request.tag = StageTag::feedback;
    request.user = prompts_.text(PromptId::feedback) + "\n\n" +
                   render_inputs_block("Wrong answer", wrong_answer, summary, followup_answers);

    RawFeedback raw = call_with_format_retry(gateway_, request, "feedback", parse_feedback);
    Feedback fb;
    fb.reflection = raw.reflection;
    fb.instructions = raw.instructions;
    if (fb.instructions.size() > static_cast<size_t>(kMaxInstructions))
        fb.instructions.resize(kMaxInstructions);
    fb.suggested_answer = extract_suggested_answer(fb.instructions);
    return fb;
}

VerificationBundle assemble_bundle(std::string task_id, std::string answer,
                                   TrajectorySummary summary,
                                   std::vector<SuspicionPair> suspicions,
                                   std::vector<FollowUpPair> pairs,
                                   std::vector<FollowUpAnswer> answers, Judgment judgment,
                                   std::optional<Feedback> feedback,
                                   std::vector<RecordedCall> calls, bool synthetic) {
    if (pairs.size() != answers.size())
        throw Error("assembly: " + std::to_string(pairs.size()) + " follow-up pairs but " +
                    std::to_string(answers.size()) + " answers");
    if (pairs.size() > static_cast<size_t>(kMaxFollowUps))
        throw Error("assembly: more than 3 follow-up pairs");
    if (judgment.verdict != verdict_of(judgment.score))
        throw Error("assembly: judgment verdict does not match its score");
    bool rejected = judgment.verdict.label == VerdictLabel::reject;
    if (rejected && !feedback) throw Error("assembly: reject verdict without feedback");
    if (!rejected && feedback) throw Error("assembly: accept verdict with feedback");
    if (feedback) {
        if (feedback->instructions.empty() ||
            feedback->instructions.size() > static_cast<size_t>(kMaxInstructions))
            throw Error("assembly: feedback must carry 1-3 instructions");
        if (feedback->reflection.empty()) throw Error("assembly: feedback reflection is empty");
    }

    VerificationBundle bundle;
    bundle.task_id = std::move(task_id);
    bundle.answer = std::move(answer);
    bundle.summary = std::move(summary);
    bundle.suspicions = std::move(suspicions);
    bundle.followups = std::move(pairs);
    bundle.followup_answers = std::move(answers);
    bundle.judgment = std::move(judgment);
    bundle.feedback = std::move(feedback);
    bundle.calls = std::move(calls);
    bundle.synthetic = synthetic;
    bundle.gateway_calls = static_cast<int>(bundle.calls.size());
    for (const auto& call : bundle.calls)
        bundle.stage_timings_ms[to_string(call.tag)] += call.latency_ms;
    return bundle;
}

// --------------------------------------------------------------------------
// Bundle JSON (one document per verification run)
// --------------------------------------------------------------------------

namespace {

nlohmann::json summary_to_json(const TrajectorySummary& summary) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& entry : summary.entries) {
        nlohmann::json items = nlohmann::json::array();
        for (const auto& item : entry.items)
            items.push_back({{"source", item.source}, {"info", item.info}});
        entries.push_back({{"step_index", entry.step_index}, {"items", std::move(items)}});
    }
    return {{"chunk_count", summary.chunk_count}, {"entries", std::move(entries)}};
}

TrajectorySummary summary_from_json(const nlohmann::json& doc) {
    TrajectorySummary summary;
    summary.chunk_count = doc.at("chunk_count").get<int>();
    for (const auto& e : doc.at("entries")) {
        SummaryEntry entry;
        entry.step_index = e.at("step_index").get<int>();
        for (const auto& i : e.at("items"))
            entry.items.push_back({i.at("source").get<std::string>(),
                                   i.at("info").get<std::string>()});
        summary.entries.push_back(std::move(entry));
    }
    return summary;
}

}  // namespace

nlohmann::json serialize(const VerificationBundle& bundle) {
    nlohmann::json suspicions = nlohmann::json::array();
    for (const auto& s : bundle.suspicions) {
        nlohmann::json label;
        if (s.label.resolved) {
            label = {{"id", s.label.resolved->id},
                     {"class_name", s.label.resolved->class_name},
                     {"subclass_name", s.label.resolved->subclass_name},
                     {"unlisted", false}};
        } else {
            label = {{"raw_text", s.label.raw_text}, {"unlisted", true}};
        }
        label["raw_text"] = s.label.raw_text;
        suspicions.push_back({{"behavior", s.behavior}, {"label", std::move(label)}});
    }

    nlohmann::json followups = nlohmann::json::array();
    for (const auto& p : bundle.followups)
        followups.push_back({{"source", p.source}, {"question", p.question}});

    nlohmann::json answers = nlohmann::json::array();
    for (const auto& a : bundle.followup_answers) {
        answers.push_back({{"source", a.pair.source},
                           {"question", a.pair.question},
                           {"explanation", a.explanation},
                           {"answer", a.answer},
                           {"agent_id", a.agent_id},
                           {"degraded", a.degraded},
                           {"error", a.error}});
    }

    nlohmann::json calls = nlohmann::json::array();
    for (const auto& c : bundle.calls) {
        calls.push_back({{"tag", to_string(c.tag)},
                         {"system", c.system},
                         {"user", c.user},
                         {"response", c.response},
                         {"finish_reason", to_string(c.finish_reason)},
                         {"latency_ms", c.latency_ms},
                         {"backend_id", c.backend_id}});
    }

    nlohmann::json doc{{"schema", "dv.bundle/1"},
                       {"task_id", bundle.task_id},
                       {"answer", bundle.answer},
                       {"summary", summary_to_json(bundle.summary)},
                       {"suspicions", std::move(suspicions)},
                       {"followups", std::move(followups)},
                       {"followup_answers", std::move(answers)},
                       {"judgment",
                        {{"explanation", bundle.judgment.explanation},
                         {"score", bundle.judgment.score},
                         {"verdict", to_string(bundle.judgment.verdict.label)}}},
                       {"calls", std::move(calls)},
                       {"stage_timings_ms", bundle.stage_timings_ms},
                       {"gateway_calls", bundle.gateway_calls},
                       {"synthetic", bundle.synthetic}};
    if (bundle.feedback) {
        nlohmann::json fb{{"reflection", bundle.feedback->reflection},
                          {"instructions", bundle.feedback->instructions}};
        if (bundle.feedback->suggested_answer)
            fb["suggested_answer"] = *bundle.feedback->suggested_answer;
        doc["feedback"] = std::move(fb);
    }
    return doc;
}

VerificationBundle parse_bundle(const nlohmann::json& doc) {
    try {
        VerificationBundle bundle;
        bundle.task_id = doc.at("task_id").get<std::string>();
        bundle.answer = doc.at("answer").get<std::string>();
        bundle.summary = summary_from_json(doc.at("summary"));

        for (const auto& s : doc.at("suspicions")) {
            SuspicionPair pair;
            pair.behavior = s.at("behavior").get<std::string>();
            const auto& label = s.at("label");
            pair.label.unlisted = label.at("unlisted").get<bool>();
            pair.label.raw_text = label.value("raw_text", "");
            if (!pair.label.unlisted) {
                FailureLabel fl;
                fl.id = label.at("id").get<std::string>();
                fl.class_name = label.at("class_name").get<std::string>();
                fl.subclass_name = label.at("subclass_name").get<std::string>();
                pair.label.resolved = std::move(fl);
            }
            bundle.suspicions.push_back(std::move(pair));
        }

        for (const auto& p : doc.at("followups"))
            bundle.followups.push_back(
                {p.at("source").get<std::string>(), p.at("question").get<std::string>()});

        for (const auto& a : doc.at("followup_answers")) {
            FollowUpAnswer ans;
            ans.pair = {a.at("source").get<std::string>(), a.at("question").get<std::string>()};
            ans.explanation = a.value("explanation", "");
            ans.answer = a.at("answer").get<std::string>();
            ans.agent_id = a.value("agent_id", "");
            ans.degraded = a.value("degraded", false);
            ans.error = a.value("error", "");
            bundle.followup_answers.push_back(std::move(ans));
        }

        const auto& j = doc.at("judgment");
        bundle.judgment.explanation = j.at("explanation").get<std::string>();
        bundle.judgment.score = j.at("score").get<int>();
        bundle.judgment.verdict = verdict_of(bundle.judgment.score);
        if (to_string(bundle.judgment.verdict.label) != j.at("verdict").get<std::string>())
            throw SchemaError("bundle.judgment: verdict does not match score");

        if (auto it = doc.find("feedback"); it != doc.end() && !it->is_null()) {
            Feedback fb;
            fb.reflection = it->at("reflection").get<std::string>();
            fb.instructions = it->at("instructions").get<std::vector<std::string>>();
            if (it->contains("suggested_answer"))
                fb.suggested_answer = (*it)["suggested_answer"].get<std::string>();
            bundle.feedback = std::move(fb);
        }

        for (const auto& c : doc.at("calls")) {
            RecordedCall call;
            call.tag = stage_tag_from_string(c.at("tag").get<std::string>());
            call.system = c.at("system").get<std::string>();
            call.user = c.at("user").get<std::string>();
            call.response = c.at("response").get<std::string>();
            call.finish_reason = finish_reason_from_string(c.at("finish_reason").get<std::string>());
            call.latency_ms = c.value("latency_ms", 0);
            call.backend_id = c.value("backend_id", "");
            bundle.calls.push_back(std::move(call));
        }

        if (doc.contains("stage_timings_ms"))
            bundle.stage_timings_ms =
                doc["stage_timings_ms"].get<std::map<std::string, std::int64_t>>();
        bundle.gateway_calls = doc.value("gateway_calls", static_cast<int>(bundle.calls.size()));
        bundle.synthetic = doc.value("synthetic", false);
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bundle: ") + e.what());
    }
}

}  // namespace dv

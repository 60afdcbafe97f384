#include "dv/decomposer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dv/error.hpp"

namespace dv {

namespace {

constexpr std::int64_t kMinChunkBudget = 1000;

// Issues the request, and on a parse failure re-issues it once with the
// format reminder appended. A second failure escalates to StageError.
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

}  // namespace

std::vector<std::pair<size_t, size_t>> plan_windows(const Trajectory& trajectory,
                                                    std::int64_t chunk_budget) {
    std::vector<std::pair<size_t, size_t>> windows;
    size_t first = 0;
    std::int64_t used = 0;
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
        std::int64_t cost = step_token_estimate(trajectory.steps[i]);
        if (i > first && used + cost > chunk_budget) {
            windows.emplace_back(first, i - 1);
            first = i;
            used = 0;
        }
        used += cost;
    }
    if (first < trajectory.steps.size()) windows.emplace_back(first, trajectory.steps.size() - 1);
    return windows;
}

std::string render_trajectory_window(const Trajectory& trajectory, size_t first, size_t last) {
    std::ostringstream out;
    for (size_t i = first; i <= last && i < trajectory.steps.size(); ++i) {
        const Step& step = trajectory.steps[i];
        out << "Step " << step.index << " (" << to_string(step.actor) << ", "
            << to_string(step.action_kind) << "):\n";
        for (const auto& source : step.sources) out << "Source: " << source << "\n";
        out << "Content: " << step.content << "\n";
    }
    return out.str();
}

std::string render_summary(const TrajectorySummary& summary) {
    std::ostringstream out;
    for (const auto& entry : summary.entries) {
        out << "Step " << entry.step_index << ":\n";
        int k = 0;
        for (const auto& item : entry.items) {
            ++k;
            out << "Source " << k << ": " << item.source << "\n";
            out << "Info " << k << ": " << item.info << "\n";
        }
    }
    return out.str();
}

std::string render_suspicions(const std::vector<SuspicionPair>& suspicions) {
    std::ostringstream out;
    int n = 0;
    for (const auto& pair : suspicions) {
        ++n;
        out << "Suspicious Behavior " << n << ": " << pair.behavior << "\n";
        out << "Potential Error " << n << ": ";
        if (pair.label.resolved)
            out << pair.label.resolved->subclass_name;
        else
            out << pair.label.raw_text << " (unlisted)";
        out << "\n";
    }
    return out.str();
}

std::string make_system_prompt(const Task& task) {
    std::ostringstream out;
    out << "Task description:\n" << task.question;
    if (!task.attachments.empty()) {
        out << "\nAttachments:";
        for (const auto& a : task.attachments) out << "\n- " << a;
    }
    return out.str();
}

Decomposer::Decomposer(Gateway& gateway, const PromptLibrary& prompts,
                       const FailureTaxonomy& taxonomy, DecomposerOptions options)
    : gateway_(gateway), prompts_(prompts), taxonomy_(taxonomy), options_(options) {}

namespace {

// Entries whose step index does not exist in the trajectory are invented by
// the model and dropped; the rest are kept in step order.
std::vector<SummaryEntry> sanitize_entries(std::vector<SummaryEntry> entries,
                                           const std::set<int>& valid_indices) {
    std::erase_if(entries, [&](const SummaryEntry& e) {
        return valid_indices.find(e.step_index) == valid_indices.end();
    });
    std::stable_sort(entries.begin(), entries.end(),
                     [](const SummaryEntry& a, const SummaryEntry& b) {
                         return a.step_index < b.step_index;
                     });
    return entries;
}

std::int64_t rendered_entry_tokens(const SummaryEntry& entry) {
    TrajectorySummary one;
    one.entries.push_back(entry);
    return estimate_tokens(render_summary(one));
}

}  // namespace

TrajectorySummary Decomposer::summarize_trajectory(const Task& task,
                                                   const Trajectory& trajectory) const {
    if (trajectory.steps.empty()) throw Error("summarize: trajectory has no steps");
    if (options_.chunk_budget < kMinChunkBudget)
        throw Error("summarize: chunk_budget must be at least " +
                    std::to_string(kMinChunkBudget));

    std::set<int> valid_indices;
    for (const auto& step : trajectory.steps) valid_indices.insert(step.index);

    auto windows = plan_windows(trajectory, options_.chunk_budget);
    TrajectorySummary summary;
    summary.chunk_count = static_cast<int>(windows.size());

    const std::string system = make_system_prompt(task);
    for (const auto& [first, last] : windows) {
        CompletionRequest request;
        request.system = system;
        request.tag = StageTag::summarize;
        request.user = PromptLibrary::render(
            prompts_.text(PromptId::summary),
            {{"[Trajectory]", render_trajectory_window(trajectory, first, last)}});
        try {
            auto entries = call_with_format_retry(gateway_, request, "summarize",
                                                  parse_step_summary);
            entries = sanitize_entries(std::move(entries), valid_indices);
            summary.entries.insert(summary.entries.end(), entries.begin(), entries.end());
        } catch (const StageError& e) {
            throw StageError("summarize",
                             "window steps " + std::to_string(trajectory.steps[first].index) +
                                 ".." + std::to_string(trajectory.steps[last].index) + ": " +
                                 e.what());
        }
    }
    return summary;
}

std::vector<SuspicionPair> Decomposer::identify_errors(const Task& task,
                                                       const TrajectorySummary& summary) const {
    if (summary.entries.empty()) throw Error("identify: summary is empty");

    TrajectorySummary working = summary;
    if (estimate_tokens(render_summary(working)) > options_.chunk_budget) {
        // One level of re-summarization: compress the summary with the same
        // prompt, window by window, then proceed regardless of size.
        std::vector<SummaryEntry> compressed;
        std::set<int> valid_indices;
        for (const auto& e : working.entries) valid_indices.insert(e.step_index);

        size_t i = 0;
        const std::string system = make_system_prompt(task);
        while (i < working.entries.size()) {
            std::int64_t used = 0;
            TrajectorySummary part;
            while (i < working.entries.size()) {
                std::int64_t cost = rendered_entry_tokens(working.entries[i]);
                if (!part.entries.empty() && used + cost > options_.chunk_budget) break;
                part.entries.push_back(working.entries[i]);
                used += cost;
                ++i;
            }
            CompletionRequest request;
            request.system = system;
            request.tag = StageTag::summarize;
            request.user = PromptLibrary::render(prompts_.text(PromptId::summary),
                                                 {{"[Trajectory]", render_summary(part)}});
            auto entries =
                call_with_format_retry(gateway_, request, "summarize", parse_step_summary);
            entries = sanitize_entries(std::move(entries), valid_indices);
            compressed.insert(compressed.end(), entries.begin(), entries.end());
        }
        working.entries = std::move(compressed);
    }

    CompletionRequest request;
    request.system = make_system_prompt(task);
    request.tag = StageTag::identify;
    request.user = PromptLibrary::render(
        prompts_.text(PromptId::identify),
        {{"[Failure Taxonomy]", render_for_prompt(taxonomy_)},
         {"[Trajectory Summary]", render_summary(working)}});

    auto raw = call_with_format_retry(gateway_, request, "identify", parse_suspicions);

    std::vector<SuspicionPair> suspicions;
    suspicions.reserve(raw.size());
    for (const auto& r : raw) {
        SuspicionPair pair;
        pair.behavior = r.behavior;
        pair.label.raw_text = trim(r.error_text);
        if (auto found = lookup_label(taxonomy_, pair.label.raw_text)) {
            pair.label.resolved = *found;
            pair.label.unlisted = false;
        } else {
            pair.label.unlisted = true;
        }
        suspicions.push_back(std::move(pair));
    }
    return suspicions;
}

std::vector<FollowUpPair> Decomposer::formulate_followups(
    const Task& task, const std::string& answer, const TrajectorySummary& summary,
    const std::vector<SuspicionPair>& suspicions) const {
    if (answer.empty()) throw Error("followup: answer must be non-empty");
    if (suspicions.empty()) return {};  // fast-accept path: no call at all

    CompletionRequest request;
    request.system = make_system_prompt(task);
    request.tag = StageTag::followup;
    request.user = PromptLibrary::render(prompts_.text(PromptId::followup),
                                         {{"[Answer]", answer},
                                          {"[Trajectory Summary]", render_summary(summary)},
                                          {"[Potential Errors]", render_suspicions(suspicions)}});

    auto raw = call_with_format_retry(gateway_, request, "followup", parse_followups);

    std::vector<FollowUpPair> pairs;
    for (const auto& r : raw) {
        if (pairs.size() == static_cast<size_t>(kMaxFollowUps)) break;
        pairs.push_back(FollowUpPair{r.source, r.question});
    }
    return pairs;
}

}  // namespace dv

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dv/gateway.hpp"
#include "dv/model.hpp"
#include "dv/parsers.hpp"
#include "dv/prompts.hpp"
#include "dv/taxonomy.hpp"

namespace dv {

// Step-indexed synopsis of a trajectory: what the agent visited and what it
// learned, nothing interpretive.
struct TrajectorySummary {
    std::vector<SummaryEntry> entries;
    int chunk_count = 0;
};

struct SuspicionLabel {
    std::optional<FailureLabel> resolved;  // set when lookup succeeded
    std::string raw_text;
    bool unlisted = false;  // text did not resolve against the taxonomy
};

struct SuspicionPair {
    std::string behavior;
    SuspicionLabel label;
};

struct FollowUpPair {
    std::string source;
    std::string question;

    bool operator==(const FollowUpPair&) const = default;
};

// Hard cap on follow-up pairs per verification.
inline constexpr int kMaxFollowUps = 3;

struct DecomposerOptions {
    std::int64_t chunk_budget = 32000;  // estimated tokens per summary window
};

// Contiguous [first, last] index ranges into trajectory.steps, each within
// the token budget (a single oversized step still gets its own window).
std::vector<std::pair<size_t, size_t>> plan_windows(const Trajectory& trajectory,
                                                    std::int64_t chunk_budget);

// Deterministic renderings shared with the judge/feedback input blocks.
std::string render_trajectory_window(const Trajectory& trajectory, size_t first, size_t last);
std::string render_summary(const TrajectorySummary& summary);
std::string render_suspicions(const std::vector<SuspicionPair>& suspicions);

// System message carried by every stage call: the task description.
std::string make_system_prompt(const Task& task);

class Decomposer {
public:
    Decomposer(Gateway& gateway, const PromptLibrary& prompts, const FailureTaxonomy& taxonomy,
               DecomposerOptions options = {});

    // Partitions steps into contiguous windows within the budget, summarizes
    // each window with one gateway call, and concatenates in step order.
    TrajectorySummary summarize_trajectory(const Task& task, const Trajectory& trajectory) const;

    // One identify call over the full concatenated summary. When the summary
    // itself exceeds the budget it is re-summarized once first.
    std::vector<SuspicionPair> identify_errors(const Task& task,
                                               const TrajectorySummary& summary) const;

    // Empty suspicions short-circuit to no follow-ups without a call.
    std::vector<FollowUpPair> formulate_followups(const Task& task, const std::string& answer,
                                                  const TrajectorySummary& summary,
                                                  const std::vector<SuspicionPair>& suspicions) const;

private:
    Gateway& gateway_;
    const PromptLibrary& prompts_;
    const FailureTaxonomy& taxonomy_;
    DecomposerOptions options_;
};

}  // namespace dv

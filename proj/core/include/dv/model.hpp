#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dv {

// ---------------------------------------------------------------------------
// Domain types shared by every module. Values are immutable after
// construction and safe to share across threads.
// ---------------------------------------------------------------------------

struct Task {
    std::string id;
    std::string question;
    std::optional<std::string> gold_answer;  // meta-eval only
    std::vector<std::string> attachments;    // opaque references, never loaded
};

enum class Actor { main_agent, sub_agent };
enum class ActionKind { plan, search, click, read, code, other };

struct Step {
    int index = 0;  // 1-based, strictly increasing within a trajectory
    Actor actor = Actor::main_agent;
    ActionKind action_kind = ActionKind::other;
    std::vector<std::string> sources;  // may be empty only for plan/code/other
    std::string content;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::string task_id;
    std::vector<Step> steps;
    std::string final_answer;
    std::int64_t token_estimate = 0;

    bool operator==(const Trajectory&) const = default;
};

enum class VerdictLabel { accept, reject };

struct Verdict {
    VerdictLabel label = VerdictLabel::reject;
    int score = 1;  // 1-4; reject <=> {1,2}, accept <=> {3,4}

    bool operator==(const Verdict&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Maps a 1-4 rubric score to its verdict. Throws RangeError outside 1-4.
Verdict verdict_of(int score);

// Lowercases, trims, strips trailing sentence punctuation, and removes
// thousands separators from numeric tokens. Total and idempotent.
std::string normalize_answer(std::string_view text);

// Coarse token estimate: ceil(chars / 4).
std::int64_t estimate_tokens(std::string_view text);

// Per-step estimate used for chunking decisions.
std::int64_t step_token_estimate(const Step& step);

// Parses one trajectory document. Throws SchemaError naming the offending
// field; non-monotonic step indices are rejected.
Trajectory parse_trajectory(const nlohmann::json& doc);
Trajectory parse_trajectory_text(const std::string& json_text);
Trajectory load_trajectory(const std::filesystem::path& path);

nlohmann::json serialize(const Trajectory& trajectory);

// JSONL corpus: one trajectory document per line.
std::vector<Trajectory> load_trajectory_corpus(const std::filesystem::path& path);

Task parse_task(const nlohmann::json& doc);
Task load_task(const std::filesystem::path& path);
nlohmann::json serialize(const Task& task);

// JSONL corpus: one task document per line.
std::vector<Task> load_task_corpus(const std::filesystem::path& path);

// Enum <-> string helpers used by serialization and prompt rendering.
std::string to_string(Actor actor);
std::string to_string(ActionKind kind);
std::string to_string(VerdictLabel label);
Actor actor_from_string(std::string_view s);
ActionKind action_kind_from_string(std::string_view s);
VerdictLabel verdict_label_from_string(std::string_view s);

// Generic string helpers shared across modules.
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace dv

#include "dv/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dv/error.hpp"

namespace dv {

namespace {

const nlohmann::json& require_field(const nlohmann::json& doc, const std::string& name,
                                    const std::string& where) {
    auto it = doc.find(name);
    if (it == doc.end()) throw SchemaError(where + name + ": missing required field");
    return *it;
}

std::string require_string(const nlohmann::json& doc, const std::string& name,
                           const std::string& where, bool allow_empty = true) {
    const auto& v = require_field(doc, name, where);
    if (!v.is_string()) throw SchemaError(where + name + ": expected a string");
    auto s = v.get<std::string>();
    if (!allow_empty && s.empty()) throw SchemaError(where + name + ": must be non-empty");
    return s;
}

}  // namespace

Verdict verdict_of(int score) {
    if (score < 1 || score > 4)
        throw RangeError("score out of range: " + std::to_string(score) + " (rubric is 1-4)");
    return Verdict{score <= 2 ? VerdictLabel::reject : VerdictLabel::accept, score};
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Removes commas acting as thousands separators: a comma between a digit and
// exactly three digits that are not followed by another digit.
std::string strip_thousands_separators(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',' && i > 0 && is_digit(s[i - 1]) && i + 3 < s.size() &&
            is_digit(s[i + 1]) && is_digit(s[i + 2]) && is_digit(s[i + 3]) &&
            (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
            continue;  // drop the separator
        }
        out.push_back(s[i]);
    }
    return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
    std::string s = to_lower(trim(text));
    // Strip trailing sentence punctuation, re-trimming as it is removed.
    for (;;) {
        if (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) {
            s.pop_back();
            s = trim(s);
            continue;
        }
        break;
    }
    return strip_thousands_separators(s);
}

std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t step_token_estimate(const Step& step) { return estimate_tokens(step.content); }

std::string to_string(Actor actor) {
    return actor == Actor::main_agent ? "main-agent" : "sub-agent";
}

std::string to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::plan: return "plan";
        case ActionKind::search: return "search";
        case ActionKind::click: return "click";
        case ActionKind::read: return "read";
        case ActionKind::code: return "code";
        case ActionKind::other: return "other";
    }
    return "other";
}

std::string to_string(VerdictLabel label) {
    return label == VerdictLabel::accept ? "accept" : "reject";
}

Actor actor_from_string(std::string_view s) {
    if (s == "main-agent") return Actor::main_agent;
    if (s == "sub-agent") return Actor::sub_agent;
    throw SchemaError("actor: unknown value '" + std::string(s) + "'");
}

ActionKind action_kind_from_string(std::string_view s) {
    if (s == "plan") return ActionKind::plan;
    if (s == "search") return ActionKind::search;
    if (s == "click") return ActionKind::click;
    if (s == "read") return ActionKind::read;
    if (s == "code") return ActionKind::code;
    if (s == "other") return ActionKind::other;
    throw SchemaError("action_kind: unknown value '" + std::string(s) + "'");
}

VerdictLabel verdict_label_from_string(std::string_view s) {
    if (s == "accept") return VerdictLabel::accept;
    if (s == "reject") return VerdictLabel::reject;
    throw SchemaError("verdict: unknown value '" + std::string(s) + "'");
}

namespace {

bool sources_may_be_empty(ActionKind kind) {
    return kind == ActionKind::plan || kind == ActionKind::code || kind == ActionKind::other;
}

}  // namespace

Trajectory parse_trajectory(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("document: expected a JSON object");

    Trajectory t;
    t.task_id = require_string(doc, "task_id", "", /*allow_empty=*/false);

    const auto& steps = require_field(doc, "steps", "");
    if (!steps.is_array() || steps.empty())
        throw SchemaError("steps: expected a non-empty array");

    int prev_index = 0;
    std::int64_t tokens = 0;
    for (size_t i = 0; i < steps.size(); ++i) {
        const std::string where = "steps[" + std::to_string(i) + "].";
        const auto& raw = steps[i];
        if (!raw.is_object()) throw SchemaError(where + ": expected an object");

        Step step;
        const auto& idx = require_field(raw, "index", where);
        if (!idx.is_number_integer() || idx.get<int>() < 1)
            throw SchemaError(where + "index: expected a positive integer");
        step.index = idx.get<int>();
        if (step.index <= prev_index)
            throw SchemaError(where + "index: non-monotonic step index");
        prev_index = step.index;

        step.actor = actor_from_string(require_string(raw, "actor", where));
        step.action_kind = action_kind_from_string(require_string(raw, "action_kind", where));

        if (auto it = raw.find("sources"); it != raw.end()) {
            if (!it->is_array()) throw SchemaError(where + "sources: expected an array");
            for (const auto& s : *it) {
                if (!s.is_string()) throw SchemaError(where + "sources: expected strings");
                step.sources.push_back(s.get<std::string>());
            }
        }
        if (step.sources.empty() && !sources_may_be_empty(step.action_kind))
            throw SchemaError(where + "sources: required for action_kind '" +
                              to_string(step.action_kind) + "'");

        step.content = require_string(raw, "content", where);
        tokens += step_token_estimate(step);
        t.steps.push_back(std::move(step));
    }

    t.final_answer = require_string(doc, "final_answer", "");
    t.token_estimate = tokens;
    return t;
}

Trajectory parse_trajectory_text(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("document: invalid JSON: ") + e.what());
    }
    return parse_trajectory(doc);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("trajectory file not readable: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_trajectory_text(buf.str());
}

nlohmann::json serialize(const Trajectory& trajectory) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : trajectory.steps) {
        steps.push_back({{"index", step.index},
                         {"actor", to_string(step.actor)},
                         {"action_kind", to_string(step.action_kind)},
                         {"sources", step.sources},
                         {"content", step.content}});
    }
    return {{"task_id", trajectory.task_id},
            {"steps", std::move(steps)},
            {"final_answer", trajectory.final_answer}};
}

std::vector<Trajectory> load_trajectory_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("corpus file not readable: " + path.string());
    std::vector<Trajectory> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse_trajectory_text(line));
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

Task parse_task(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("task: expected a JSON object");
    Task task;
    task.id = require_string(doc, "id", "task.", /*allow_empty=*/false);
    task.question = require_string(doc, "question", "task.", /*allow_empty=*/false);
    if (auto it = doc.find("gold_answer"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) throw SchemaError("task.gold_answer: expected a string");
        task.gold_answer = it->get<std::string>();
    }
    if (auto it = doc.find("attachments"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw SchemaError("task.attachments: expected an array");
        for (const auto& a : *it) {
            if (!a.is_string()) throw SchemaError("task.attachments: expected strings");
            task.attachments.push_back(a.get<std::string>());
        }
    }
    return task;
}

Task load_task(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("task file not readable: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("task: invalid JSON: ") + e.what());
    }
    return parse_task(doc);
}

nlohmann::json serialize(const Task& task) {
    nlohmann::json doc{{"id", task.id}, {"question", task.question}};
    if (task.gold_answer) doc["gold_answer"] = *task.gold_answer;
    if (!task.attachments.empty()) doc["attachments"] = task.attachments;
    return doc;
}

std::vector<Task> load_task_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("corpus file not readable: " + path.string());
    std::vector<Task> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(parse_task(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace dv

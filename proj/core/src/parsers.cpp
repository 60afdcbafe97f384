#include "dv/parsers.hpp"

#include <optional>
#include <sstream>

#include "dv/error.hpp"
#include "dv/model.hpp"

namespace dv {

const char* kNoErrorsSentinel = "No potential errors found";

namespace {

struct AnchorMatch {
    int number = 0;  // 0 when the anchor carries no number
    std::string rest;
};

// Matches "<ws> label <ws> [digits] <ws> ':' rest". The label comparison is
// exact; numbering is optional and its value is not validated.
std::optional<AnchorMatch> match_anchor(const std::string& line, const char* label,
                                        bool numbered) {
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t n = std::char_traits<char>::length(label);
    if (line.compare(i, n, label) != 0) return std::nullopt;
    i += n;
    size_t after_label = i;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    int number = 0;
    bool saw_digits = false;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
        saw_digits = true;
        if (number < 1000000) number = number * 10 + (line[i] - '0');
        ++i;
    }
    if (numbered && !saw_digits && i == after_label) {
        // Require a separator between label and ':' to avoid matching
        // extended words ("Instructions:" for label "Instruction").
        if (i < line.size() && line[i] != ':') return std::nullopt;
    }
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    AnchorMatch m;
    m.number = number;
    m.rest = trim(line.substr(i));
    return m;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

void append_continuation(std::string* field, const std::string& line) {
    if (field == nullptr) return;
    std::string t = trim(line);
    if (t.empty()) return;
    if (!field->empty()) field->push_back('\n');
    field->append(t);
}

}  // namespace

std::vector<SummaryEntry> parse_step_summary(const std::string& text) {
    std::vector<SummaryEntry> entries;
    SummaryEntry* entry = nullptr;
    std::optional<SummaryItem> pending;
    std::string* open_field = nullptr;

    auto close_item = [&] {
        if (pending && entry != nullptr && !trim(pending->source).empty())
            entry->items.push_back(*pending);
        pending.reset();
    };

    for (const auto& line : split_lines(text)) {
        if (auto m = match_anchor(line, "Step", true)) {
            close_item();
            entries.push_back(SummaryEntry{m->number, {}});
            entry = &entries.back();
            open_field = nullptr;
            continue;
        }
        if (auto m = match_anchor(line, "Source", true)) {
            close_item();
            if (entry == nullptr) continue;  // source before any step: ignore
            pending = SummaryItem{m->rest, ""};
            open_field = &pending->source;
            continue;
        }
        if (auto m = match_anchor(line, "Info", true)) {
            if (!pending) continue;  // info without a source: skip
            pending->info = m->rest;
            open_field = &pending->info;
            continue;
        }
        append_continuation(open_field, line);
    }
    close_item();

    if (entries.empty()) throw ParseError("summary output: no 'Step N:' anchor found");
    return entries;
}

std::vector<RawSuspicion> parse_suspicions(const std::string& text) {
    if (trim(text) == kNoErrorsSentinel) return {};

    std::vector<RawSuspicion> pairs;
    std::optional<std::string> open_behavior;
    std::string* open_field = nullptr;

    for (const auto& line : split_lines(text)) {
        if (auto m = match_anchor(line, "Suspicious Behavior", true)) {
            if (open_behavior)
                throw ParseError("error-identification output: behavior without a matching "
                                 "potential error line");
            open_behavior = m->rest;
            open_field = &*open_behavior;
            continue;
        }
        if (auto m = match_anchor(line, "Potential Error", true)) {
            if (!open_behavior)
                throw ParseError("error-identification output: potential error without a "
                                 "preceding suspicious behavior");
            pairs.push_back(RawSuspicion{trim(*open_behavior), m->rest});
            open_behavior.reset();
            open_field = &pairs.back().error_text;
            continue;
        }
        append_continuation(open_field, line);
    }
    if (open_behavior)
        throw ParseError("error-identification output: behavior without a matching potential "
                         "error line");
    if (pairs.empty())
        throw ParseError("error-identification output: neither the sentinel nor behavior/error "
                         "pairs found");
    for (const auto& p : pairs) {
        if (p.behavior.empty() || trim(p.error_text).empty())
            throw ParseError("error-identification output: empty behavior or error field");
    }
    return pairs;
}

std::vector<RawFollowUp> parse_followups(const std::string& text) {
    std::vector<RawFollowUp> pairs;
    std::optional<std::string> open_source;
    std::string* open_field = nullptr;

    for (const auto& line : split_lines(text)) {
        if (auto m = match_anchor(line, "Additional Source", true)) {
            if (open_source)
                throw ParseError("follow-up output: source without a matching question line");
            open_source = m->rest;
            open_field = &*open_source;
            continue;
        }
        if (auto m = match_anchor(line, "Additional Question", true)) {
            if (!open_source)
                throw ParseError("follow-up output: question without a preceding source");
            pairs.push_back(RawFollowUp{trim(*open_source), m->rest});
            open_source.reset();
            open_field = &pairs.back().question;
            continue;
        }
        append_continuation(open_field, line);
    }
    if (open_source)
        throw ParseError("follow-up output: source without a matching question line");
    if (pairs.empty()) throw ParseError("follow-up output: no source/question pairs found");
    for (const auto& p : pairs) {
        if (p.source.empty() || trim(p.question).empty())
            throw ParseError("follow-up output: empty source or question field");
    }
    return pairs;
}

RawJudgment parse_judgment(const std::string& text) {
    std::optional<RawJudgment> last_good;
    std::optional<std::string> open_explanation;
    std::string* open_field = nullptr;
    bool saw_score_anchor = false;
    bool saw_bad_score = false;

    for (const auto& line : split_lines(text)) {
        if (auto m = match_anchor(line, "Explanation", false)) {
            open_explanation = m->rest;
            open_field = &*open_explanation;
            continue;
        }
        if (auto m = match_anchor(line, "Score", false)) {
            saw_score_anchor = true;
            open_field = nullptr;
            if (!open_explanation) continue;
            std::string value = trim(m->rest);
            if (value.size() > 1 && value.back() == '.') value = trim(value.substr(0, value.size() - 1));
            bool numeric = !value.empty();
            int score = 0;
            for (char c : value) {
                if (c < '0' || c > '9') {
                    numeric = false;
                    break;
                }
                if (score < 1000) score = score * 10 + (c - '0');
            }
            std::string explanation = trim(*open_explanation);
            open_explanation.reset();
            if (!numeric || score < 1 || score > 4 || explanation.empty()) {
                saw_bad_score = saw_bad_score || !numeric || score < 1 || score > 4;
                continue;  // not a well-formed pair
            }
            last_good = RawJudgment{explanation, score};
            continue;
        }
        append_continuation(open_field, line);
    }

    if (!last_good) {
        if (saw_bad_score)
            throw ParseError("judgment output: score is not an integer in 1-4");
        if (!saw_score_anchor)
            throw ParseError("judgment output: no 'Score:' line found");
        throw ParseError("judgment output: no well-formed Explanation/Score pair found");
    }
    return *last_good;
}

RawFeedback parse_feedback(const std::string& text) {
    RawFeedback fb;
    std::string* open_field = nullptr;
    bool saw_reflection = false;

    for (const auto& line : split_lines(text)) {
        if (auto m = match_anchor(line, "Reflection", false)) {
            fb.reflection = m->rest;
            open_field = &fb.reflection;
            saw_reflection = true;
            continue;
        }
        if (auto m = match_anchor(line, "Instruction", true)) {
            fb.instructions.push_back(m->rest);
            open_field = &fb.instructions.back();
            continue;
        }
        append_continuation(open_field, line);
    }

    if (!saw_reflection || trim(fb.reflection).empty())
        throw ParseError("feedback output: missing or empty 'Reflection:' line");
    fb.reflection = trim(fb.reflection);
    for (auto& ins : fb.instructions) ins = trim(ins);
    std::erase_if(fb.instructions, [](const std::string& s) { return s.empty(); });
    if (fb.instructions.empty())
        throw ParseError("feedback output: no 'Instruction N:' lines found");
    return fb;
}

}  // namespace dv

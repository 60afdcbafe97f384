#pragma once

#include <string>
#include <vector>

namespace dv {

// Parsers for the model-output formats the stage prompts require. All are
// line-anchored with tolerant whitespace and tolerant numbering (restarted or
// skipped N is accepted); pair ordering is strict. Lines that match no anchor
// continue the most recently opened field; text before the first anchor is
// ignored. Each parser throws ParseError when the output is unusable.

struct SummaryItem {
    std::string source;
    std::string info;

    bool operator==(const SummaryItem&) const = default;
};

struct SummaryEntry {
    int step_index = 0;
    std::vector<SummaryItem> items;

    bool operator==(const SummaryEntry&) const = default;
};

// "Step N:" / "Source k:" / "Info k:". Items with an empty source are
// dropped. Throws if there is no Step anchor at all.
std::vector<SummaryEntry> parse_step_summary(const std::string& text);

struct RawSuspicion {
    std::string behavior;
    std::string error_text;
};

// Exact sentinel line for "nothing suspicious".
extern const char* kNoErrorsSentinel;

// "Suspicious Behavior N:" / "Potential Error N:". The byte-exact sentinel
// (modulo surrounding whitespace) yields an empty list; a behavior line must
// precede its error line.
std::vector<RawSuspicion> parse_suspicions(const std::string& text);

struct RawFollowUp {
    std::string source;
    std::string question;
};

// "Additional Source N:" / "Additional Question N:". Returns pairs in order,
// without applying the downstream cap.
std::vector<RawFollowUp> parse_followups(const std::string& text);

struct RawJudgment {
    std::string explanation;
    int score = 0;
};

// "Explanation: ..." then "Score: <1-4>". Leading chatter is tolerated by
// scanning for the last well-formed pair.
RawJudgment parse_judgment(const std::string& text);

struct RawFeedback {
    std::string reflection;
    std::vector<std::string> instructions;
};

// "Reflection: ..." then "Instruction N: ..." lines, without the cap applied.
RawFeedback parse_feedback(const std::string& text);

}  // namespace dv

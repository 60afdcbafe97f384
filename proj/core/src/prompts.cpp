#include "dv/prompts.hpp"

#include <fstream>
#include <sstream>

#include "dv/error.hpp"

namespace dv {

namespace {

// Kept byte-identical with the files under assets/prompts/ (guarded by a
// unit test) so the library works without installed data files.

const char* kSummaryPrompt =
    R"tmpl(Summarize each step in the trajectory. For every step, list the online sources visited by the agent and the key info obtained from each source.

**Required format (repeat “Step N” blocks as needed):**

Step 1:
Source 1: source visited by the agent
Info 1: information obtained from the source
Source 2: source visited by the agent
Info 2: information obtained from the source
Step 2:

...

Here is the trajectory:

[Trajectory]
)tmpl";

const char* kIdentifyPrompt =
    R"tmpl(Identify suspicious behaviors and map each to **one** potential error from the list below.
If none, return exactly: `No potential errors found`.

**Potential error list:**

[Failure Taxonomy]

**Required format (or the single-line “No potential errors found”):**

Suspicious Behavior 1: short description
Potential Error 1: one item from the list
Suspicious Behavior 2: short description
Potential Error 2: one item from the list
...

Here is the trajectory summary:

[Trajectory Summary]
)tmpl";

const char* kFollowupPrompt =
    R"tmpl(Assume a web-capable research agent exists. Propose the **fewest** source-question pairs needed to verify `answer`, using `task`, the [Trajectory Summary], and [Potential Errors].

**Required format (up to 3 pairs):**

Additional Source 1: source
Additional Question 1: a yes-no question based on the source
Additional Source 2: source
Additional Question 2: a yes-no question based on the source
...

Here are the inputs:

[Answer]
[Trajectory Summary]
[Potential Errors]
)tmpl";

const char* kVerifyPrompt =
    R"tmpl(Here is a source and question pair. Answer the question based on the source.

Source: {source}

Question: {question}

Return a brief explanation and concise answer to the question based on the source without any additional text.
)tmpl";

const char* kJudgePrompt =
    R"tmpl(You are given a task description, an unverified answer, a summary of how the agent obtained the unverified answer, and additional answers provided by another research agent regarding the additional questions. Decide if the unverified answer is correct by first providing a concise explanation,
then returning a score between 1 and 4, where:
1 = completely incorrect
2 = mostly incorrect
3 = mostly correct
4 = completely correct

Your response should **exactly follow** this format, with no additional content:

Explanation: explanation
Score: score
)tmpl";

const char* kFeedbackPrompt =
    R"tmpl(You are given a task description, a wrong answer given by an agent, a summary of how the agent obtained the wrong answer, and additional answers provided by another research agent regarding the additional questions. Now, the agent will try to solve the task again. Based on these inputs, you need to help the agent retrieve the correct answer by first providing a brief reflection and then providing **no more than three instructions**. Note that 1) the agent will strictly follow your instruction; if it cannot get the correct answer again, which means your instruction is not useful, then you will be punished. 2) point out necessary sources and actions to avoid the agent making the same mistakes again. 3) The agent is good at understanding clear, concise, and accurate instructions rather than long or complex instructions; the latter will confuse it. 4) You can also suggest the answer to the question in the instructions if you can determine the answer from available information. Your response should strictly follow this format without any other content:

Reflection: brief reflection

Instruction 1: instruction
Instruction 2: instruction
...
)tmpl";

const char* embedded_text(PromptId id) {
    switch (id) {
        case PromptId::summary: return kSummaryPrompt;
        case PromptId::identify: return kIdentifyPrompt;
        case PromptId::followup: return kFollowupPrompt;
        case PromptId::verify: return kVerifyPrompt;
        case PromptId::judge: return kJudgePrompt;
        case PromptId::feedback: return kFeedbackPrompt;
    }
    throw Error("unknown prompt id");
}

constexpr PromptId kAllPrompts[] = {PromptId::summary,  PromptId::identify,
                                    PromptId::followup, PromptId::verify,
                                    PromptId::judge,    PromptId::feedback};

}  // namespace

const char* prompt_file_name(PromptId id) {
    switch (id) {
        case PromptId::summary: return "summary.txt";
        case PromptId::identify: return "identify.txt";
        case PromptId::followup: return "followup.txt";
        case PromptId::verify: return "verify.txt";
        case PromptId::judge: return "judge.txt";
        case PromptId::feedback: return "feedback.txt";
    }
    throw Error("unknown prompt id");
}

PromptLibrary PromptLibrary::embedded_defaults() {
    PromptLibrary lib;
    for (auto id : kAllPrompts) lib.texts_[id] = embedded_text(id);
    return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
    PromptLibrary lib = embedded_defaults();
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("prompts directory not found: " + dir.string());
    for (auto id : kAllPrompts) {
        auto path = dir / prompt_file_name(id);
        std::ifstream in(path);
        if (!in) continue;  // keep the embedded default
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        if (text.empty()) throw ConfigError("prompt file is empty: " + path.string());
        lib.texts_[id] = std::move(text);
    }
    return lib;
}

const std::string& PromptLibrary::text(PromptId id) const { return texts_.at(id); }

std::string PromptLibrary::render(const std::string& templ,
                                  const std::vector<std::pair<std::string, std::string>>& subs) {
    std::string out = templ;
    for (const auto& [token, value] : subs) {
        if (token.empty()) continue;
        size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace dv

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dv {

enum class PromptId { summary, identify, followup, verify, judge, feedback };

const char* prompt_file_name(PromptId id);  // e.g. "summary.txt"

// The six stage templates. Defaults are compiled in; a prompts directory can
// override any of them (file name per prompt_file_name). Templates carry
// named placeholders ([Trajectory], [Failure Taxonomy], [Trajectory Summary],
// [Potential Errors], [Answer], {source}, {question}).
class PromptLibrary {
public:
    static PromptLibrary embedded_defaults();
    // Missing files fall back to the embedded default for that prompt.
    static PromptLibrary load_dir(const std::filesystem::path& dir);

    const std::string& text(PromptId id) const;

    // Replaces every occurrence of each placeholder token.
    static std::string render(const std::string& templ,
                              const std::vector<std::pair<std::string, std::string>>& subs);

private:
    std::map<PromptId, std::string> texts_;
};

}  // namespace dv

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dv {

struct FailureLabel {
    std::string class_name;
    std::string subclass_name;
    std::string id;  // stable slug
    std::string description;

    bool operator==(const FailureLabel&) const = default;
};

// Registry of agent failure modes. Ordering is deterministic: class order
// from the file, then subclass order within each class.
struct FailureTaxonomy {
    std::string version;
    std::vector<FailureLabel> labels;

    std::vector<std::string> class_names() const;
    size_t class_count() const { return class_names().size(); }
    size_t subclass_count() const { return labels.size(); }
};

// The taxonomy shipped with the library: 5 classes, 13 subclasses.
FailureTaxonomy default_taxonomy();

// Raw bytes of the default taxonomy file (same content `load_taxonomy` sees).
const std::string& default_taxonomy_text();

FailureTaxonomy parse_taxonomy(const nlohmann::json& doc);
FailureTaxonomy load_taxonomy(const std::filesystem::path& path);
nlohmann::json serialize(const FailureTaxonomy& taxonomy);

// Case-insensitive exact match on subclass name or id. Miss is not an error.
std::optional<FailureLabel> lookup_label(const FailureTaxonomy& taxonomy, std::string_view name);

// Deterministic rendering for the error-identification prompt: one header per
// class, one bullet per subclass. Byte-stable for a given taxonomy.
std::string render_for_prompt(const FailureTaxonomy& taxonomy);

}  // namespace dv

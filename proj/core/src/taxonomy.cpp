#include "dv/taxonomy.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dv/error.hpp"
#include "dv/model.hpp"

namespace dv {

namespace {

// Kept byte-identical with assets/taxonomy/default.json (a unit test guards
// the pair), so the library works without any installed data files.
const char* kDefaultTaxonomyJson = R"json({
  "version": "1.0",
  "classes": [
    {
      "name": "Finding Sources",
      "subclasses": [
        {
          "id": "wrong-evidence",
          "name": "wrong evidence",
          "description": "Consulted a source that does not actually support the claim taken from it."
        },
        {
          "id": "generic-searches",
          "name": "generic searches",
          "description": "Relied on broad search-result snippets instead of locating the specific authoritative source."
        },
        {
          "id": "reserved-finding-sources",
          "name": "reserved (finding sources)",
          "description": "Reserved slot; edit this file to name an additional source-finding failure mode."
        }
      ]
    },
    {
      "name": "Reasoning",
      "subclasses": [
        {
          "id": "premature-conclusions",
          "name": "premature conclusions",
          "description": "Concluded before gathering enough evidence to settle the question."
        },
        {
          "id": "misinterpretation",
          "name": "misinterpretation",
          "description": "Read the right material but drew the wrong meaning from it."
        },
        {
          "id": "hallucinated-claims",
          "name": "hallucinated or overconfident claims",
          "description": "Asserted facts that no visited source supports, or stated them with unwarranted confidence."
        }
      ]
    },
    {
      "name": "Problem Understanding and Decomposition",
      "subclasses": [
        {
          "id": "misunderstanding-instructions",
          "name": "misunderstanding instructions",
          "description": "Solved a different problem than the task actually asked."
        },
        {
          "id": "goal-drift",
          "name": "goal drift",
          "description": "Lost track of the original objective while working through sub-tasks."
        },
        {
          "id": "reserved-problem-understanding",
          "name": "reserved (problem understanding)",
          "description": "Reserved slot; edit this file to name an additional understanding failure mode."
        }
      ]
    },
    {
      "name": "Action Errors",
      "subclasses": [
        {
          "id": "ui-failures",
          "name": "UI failures",
          "description": "Failed to operate a page or tool interface correctly."
        },
        {
          "id": "format-mistakes",
          "name": "format mistakes",
          "description": "Produced output in the wrong format for the task or the tool being driven."
        },
        {
          "id": "wrong-modality-use",
          "name": "wrong modality use",
          "description": "Used an unsuitable modality for the content, such as text extraction where a screenshot was needed."
        }
      ]
    },
    {
      "name": "Max Step Reached",
      "subclasses": [
        {
          "id": "max-step-reached",
          "name": "max step reached",
          "description": "The run ended at the step limit before reaching a final answer."
        }
      ]
    }
  ]
}
)json";

}  // namespace

const std::string& default_taxonomy_text() {
    static const std::string text = kDefaultTaxonomyJson;
    return text;
}

FailureTaxonomy default_taxonomy() {
    return parse_taxonomy(nlohmann::json::parse(default_taxonomy_text()));
}

std::vector<std::string> FailureTaxonomy::class_names() const {
    std::vector<std::string> names;
    for (const auto& label : labels) {
        if (names.empty() || names.back() != label.class_name) {
            // Classes are contiguous by construction; guard against repeats
            // appearing later in the list anyway.
            bool seen = false;
            for (const auto& n : names) {
                if (n == label.class_name) {
                    seen = true;
                    break;
                }
            }
            if (!seen) names.push_back(label.class_name);
        }
    }
    return names;
}

FailureTaxonomy parse_taxonomy(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("taxonomy: expected a JSON object");
    FailureTaxonomy taxonomy;

    if (auto it = doc.find("version"); it != doc.end() && it->is_string())
        taxonomy.version = it->get<std::string>();
    else
        throw SchemaError("taxonomy.version: missing required string");

    auto classes = doc.find("classes");
    if (classes == doc.end() || !classes->is_array() || classes->empty())
        throw SchemaError("taxonomy.classes: expected a non-empty array");

    std::set<std::string> seen_ids;
    std::set<std::pair<std::string, std::string>> seen_names;
    std::set<std::string> seen_classes;

    for (const auto& cls : *classes) {
        if (!cls.is_object() || !cls.contains("name") || !cls["name"].is_string())
            throw SchemaError("taxonomy.classes[].name: expected a string");
        std::string class_name = cls["name"].get<std::string>();
        if (class_name.empty()) throw SchemaError("taxonomy.classes[].name: must be non-empty");
        if (!seen_classes.insert(class_name).second)
            throw SchemaError("taxonomy: duplicate class '" + class_name + "'");

        auto subs = cls.find("subclasses");
        if (subs == cls.end() || !subs->is_array() || subs->empty())
            throw SchemaError("taxonomy class '" + class_name +
                              "': subclasses must be a non-empty array");

        for (const auto& sub : *subs) {
            FailureLabel label;
            label.class_name = class_name;
            if (!sub.is_object()) throw SchemaError("taxonomy subclass: expected an object");
            for (const char* field : {"id", "name", "description"}) {
                if (!sub.contains(field) || !sub[field].is_string() ||
                    sub[field].get<std::string>().empty())
                    throw SchemaError("taxonomy subclass in '" + class_name + "': field '" +
                                      field + "' must be a non-empty string");
            }
            label.id = sub["id"].get<std::string>();
            label.subclass_name = sub["name"].get<std::string>();
            label.description = sub["description"].get<std::string>();

            if (!seen_ids.insert(label.id).second)
                throw SchemaError("taxonomy: duplicate subclass id '" + label.id + "'");
            if (!seen_names.insert({class_name, label.subclass_name}).second)
                throw SchemaError("taxonomy: duplicate subclass '" + label.subclass_name +
                                  "' in class '" + class_name + "'");
            taxonomy.labels.push_back(std::move(label));
        }
    }
    return taxonomy;
}

FailureTaxonomy load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("taxonomy file not readable: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("taxonomy: invalid JSON: ") + e.what());
    }
    return parse_taxonomy(doc);
}

nlohmann::json serialize(const FailureTaxonomy& taxonomy) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& label : taxonomy.labels) {
        if (classes.empty() || classes.back()["name"] != label.class_name) {
            classes.push_back({{"name", label.class_name},
                               {"subclasses", nlohmann::json::array()}});
        }
        classes.back()["subclasses"].push_back({{"id", label.id},
                                                {"name", label.subclass_name},
                                                {"description", label.description}});
    }
    return {{"version", taxonomy.version}, {"classes", std::move(classes)}};
}

std::optional<FailureLabel> lookup_label(const FailureTaxonomy& taxonomy, std::string_view name) {
    const std::string needle = to_lower(trim(name));
    if (needle.empty()) return std::nullopt;
    for (const auto& label : taxonomy.labels) {
        if (to_lower(label.subclass_name) == needle || to_lower(label.id) == needle)
            return label;
    }
    return std::nullopt;
}

std::string render_for_prompt(const FailureTaxonomy& taxonomy) {
    std::ostringstream out;
    std::string current_class;
    bool first = true;
    for (const auto& label : taxonomy.labels) {
        if (label.class_name != current_class) {
            if (!first) out << "\n";
            out << label.class_name << ":\n";
            current_class = label.class_name;
            first = false;
        }
        out << "- " << label.subclass_name << ": " << label.description << "\n";
    }
    return out.str();
}

}  // namespace dv

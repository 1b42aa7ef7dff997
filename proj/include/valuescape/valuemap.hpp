#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuescape/textprep.hpp"
#include "valuescape/topicmodel.hpp"

namespace valuescape::valuemap {

enum class ValueKind { intrinsic, instrumental };

struct PublicValue {
    std::string id;
    std::string name;
    std::string description;
    ValueKind kind = ValueKind::intrinsic;
};

// Human-authored topic-to-value registry. Value elicitation stays a human
// judgment; the file records who made the call and when.
struct ValueRegistry {
    std::vector<PublicValue> values;
    std::map<int, std::string> topic_assignments;  // topic index -> value id (partial)
    std::map<int, std::string> captions;
    std::string author;
    std::string date;

    const PublicValue* find(const std::string& id) const;
    nlohmann::ordered_json to_json() const;
};

ValueRegistry load_registry(const nlohmann::json& j);
ValueRegistry load_registry_file(const std::filesystem::path& path);

enum class TieRule { lowest_index, unassigned };

struct DocValueAssignment {
    std::string contribution_id;
    std::optional<std::string> value_id;
    int top_topic = -1;
    double top_theta = 0.0;
};

// top_topic = argmax of the theta row; exact ties resolve by tie_rule. The
// value is set iff the top topic is mapped and top_theta clears the
// threshold.
std::vector<DocValueAssignment> assign_documents(const topicmodel::TopicModel& model,
                                                 const ValueRegistry& registry,
                                                 double threshold = 0.0,
                                                 TieRule tie_rule = TieRule::unassigned);

// Summed term counts over the documents assigned to each value, ranked
// descending; the word-cloud data product.
struct TermCount {
    std::string term;
    std::int64_t count = 0;
};

std::map<std::string, std::vector<TermCount>> value_word_frequencies(
    const std::vector<DocValueAssignment>& assignments, const textprep::DocTermMatrix& dtm,
    const ValueRegistry& registry);

nlohmann::ordered_json assignments_to_json(const std::vector<DocValueAssignment>& assignments);
std::vector<DocValueAssignment> assignments_from_json(const nlohmann::json& j);

}  // namespace valuescape::valuemap

#include "valuescape/valuemap.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "valuescape/error.hpp"

namespace valuescape::valuemap {

const PublicValue* ValueRegistry::find(const std::string& id) const {
    for (const auto& v : values)
        if (v.id == id) return &v;
    return nullptr;
}

ValueRegistry load_registry(const nlohmann::json& j) {
    ValueRegistry reg;
    if (!j.contains("values") || !j["values"].is_array())
        throw Error("registry: missing values array");
    for (const auto& o : j["values"]) {
        PublicValue v;
        v.id = o.at("id").get<std::string>();
        if (v.id.empty()) throw Error("registry: empty value id");
        if (reg.find(v.id)) throw Error("registry: duplicate value id '" + v.id + "'");
        v.name = o.value("name", v.id);
        v.description = o.value("description", std::string{});
        const std::string kind = o.value("kind", std::string{"intrinsic"});
        if (kind == "intrinsic") v.kind = ValueKind::intrinsic;
        else if (kind == "instrumental") v.kind = ValueKind::instrumental;
        else throw Error("registry: unknown kind '" + kind + "' for value '" + v.id + "'");
        reg.values.push_back(std::move(v));
    }
    if (j.contains("assignments")) {
        for (const auto& [key, val] : j["assignments"].items()) {
            int topic = 0;
            try {
                topic = std::stoi(key);
            } catch (const std::exception&) {
                throw Error("registry: assignment key '" + key + "' is not a topic index");
            }
            if (reg.topic_assignments.count(topic))
                throw Error("registry: topic " + key + " assigned twice");
            const std::string value_id = val.get<std::string>();
            if (!reg.find(value_id))
                throw Error("registry: topic " + key + " mapped to unknown value '" + value_id + "'");
            reg.topic_assignments[topic] = value_id;
        }
    }
    if (j.contains("captions")) {
        for (const auto& [key, val] : j["captions"].items()) {
            try {
                reg.captions[std::stoi(key)] = val.get<std::string>();
            } catch (const std::exception&) {
                throw Error("registry: caption key '" + key + "' is not a topic index");
            }
        }
    }
    reg.author = j.value("author", std::string{});
    reg.date = j.value("date", std::string{});
    return reg;
}

ValueRegistry load_registry_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open registry file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("registry " + path.string() + " is not valid JSON: " + e.what());
    }
    return load_registry(j);
}

nlohmann::ordered_json ValueRegistry::to_json() const {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : values) {
        nlohmann::ordered_json o;
        o["id"] = v.id;
        o["name"] = v.name;
        o["description"] = v.description;
        o["kind"] = v.kind == ValueKind::intrinsic ? "intrinsic" : "instrumental";
        arr.push_back(std::move(o));
    }
    j["values"] = std::move(arr);
    auto assignments = nlohmann::ordered_json::object();
    for (const auto& [topic, value_id] : topic_assignments)
        assignments[std::to_string(topic)] = value_id;
    j["assignments"] = std::move(assignments);
    auto captions_j = nlohmann::ordered_json::object();
    for (const auto& [topic, caption] : captions) captions_j[std::to_string(topic)] = caption;
    j["captions"] = std::move(captions_j);
    if (!author.empty()) j["author"] = author;
    if (!date.empty()) j["date"] = date;
    return j;
}

std::vector<DocValueAssignment> assign_documents(const topicmodel::TopicModel& model,
                                                 const ValueRegistry& registry,
                                                 double threshold, TieRule tie_rule) {
    if (threshold < 0.0 || threshold > 1.0)
        throw Error("assign_documents: threshold must lie in [0, 1]");
    std::vector<DocValueAssignment> out;
    out.reserve(model.doc_ids.size());
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
        const double* theta = model.theta_row(d);
        int best = 0;
        bool tied = false;
        for (int t = 1; t < model.k; ++t) {
            if (theta[t] > theta[best]) {
                best = t;
                tied = false;
            } else if (theta[t] == theta[best]) {
                tied = true;
            }
        }
        DocValueAssignment a;
        a.contribution_id = model.doc_ids[d];
        a.top_topic = best;
        a.top_theta = theta[best];
        if (tied && tie_rule == TieRule::unassigned) {
            // deterministic: ties leave the document unassigned
            a.top_topic = best;  // still the lowest tied index
            out.push_back(std::move(a));
            continue;
        }
        const auto it = registry.topic_assignments.find(best);
        if (it != registry.topic_assignments.end() && a.top_theta >= threshold)
            a.value_id = it->second;
        out.push_back(std::move(a));
    }
    return out;
}

std::map<std::string, std::vector<TermCount>> value_word_frequencies(
    const std::vector<DocValueAssignment>& assignments, const textprep::DocTermMatrix& dtm,
    const ValueRegistry& registry) {
    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(dtm.rows.size());
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) row_of[dtm.rows[d].contribution_id] = d;

    std::map<std::string, std::vector<std::int64_t>> counts;
    for (const auto& v : registry.values) counts[v.id].assign(dtm.vocabulary.size(), 0);

    for (const auto& a : assignments) {
        if (!a.value_id) continue;
        const auto it = row_of.find(a.contribution_id);
        if (it == row_of.end()) continue;
        auto cit = counts.find(*a.value_id);
        if (cit == counts.end())
            throw Error("value_word_frequencies: assignment references unknown value '" +
                        *a.value_id + "'");
        for (const auto& [term_idx, c] : dtm.rows[it->second].entries)
            cit->second[term_idx] += c;
    }

    std::map<std::string, std::vector<TermCount>> out;
    for (const auto& [value_id, vec] : counts) {
        std::vector<TermCount> table;
        for (std::size_t v = 0; v < vec.size(); ++v) {
            if (vec[v] > 0) table.push_back({dtm.vocabulary.terms[v], vec[v]});
        }
        std::sort(table.begin(), table.end(), [](const TermCount& a, const TermCount& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.term < b.term;
        });
        out[value_id] = std::move(table);
    }
    return out;
}

nlohmann::ordered_json assignments_to_json(const std::vector<DocValueAssignment>& assignments) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : assignments) {
        nlohmann::ordered_json o;
        o["id"] = a.contribution_id;
        o["top_topic"] = a.top_topic;
        o["top_theta"] = a.top_theta;
        if (a.value_id) o["value"] = *a.value_id;
        else o["value"] = nullptr;
        arr.push_back(std::move(o));
    }
    return arr;
}

std::vector<DocValueAssignment> assignments_from_json(const nlohmann::json& j) {
    std::vector<DocValueAssignment> out;
    for (const auto& o : j) {
        DocValueAssignment a;
        a.contribution_id = o.at("id").get<std::string>();
        a.top_topic = o.at("top_topic").get<int>();
        a.top_theta = o.at("top_theta").get<double>();
        if (o.contains("value") && o["value"].is_string())
            a.value_id = o["value"].get<std::string>();
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace valuescape::valuemap

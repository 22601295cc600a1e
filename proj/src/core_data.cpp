#include "ncb/core_data.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ncb/text.hpp"

namespace ncb {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Domain d) {
    switch (d) {
        case Domain::STEM: return "STEM";
        case Domain::ArtsCulture: return "ArtsCulture";
        case Domain::SocialSciences: return "SocialSciences";
        case Domain::Sports: return "Sports";
        case Domain::Other: return "Other";
    }
    return "Other";
}

Domain domain_from_string(const std::string& s, std::vector<std::string>* warnings) {
    if (s == "STEM") return Domain::STEM;
    if (s == "ArtsCulture") return Domain::ArtsCulture;
    if (s == "SocialSciences") return Domain::SocialSciences;
    if (s == "Sports") return Domain::Sports;
    if (s == "Other") return Domain::Other;
    if (warnings) warnings->push_back("unknown domain '" + s + "' mapped to Other");
    return Domain::Other;
}

std::string to_string(NeighborCategory c) {
    switch (c) {
        case NeighborCategory::EP: return "EP";
        case NeighborCategory::LI: return "LI";
        case NeighborCategory::TA: return "TA";
    }
    return "EP";
}

NeighborCategory neighbor_category_from_string(const std::string& s) {
    if (s == "EP") return NeighborCategory::EP;
    if (s == "LI") return NeighborCategory::LI;
    if (s == "TA") return NeighborCategory::TA;
    throw DatasetError("unknown neighbor category '" + s + "'");
}

std::string to_string(AnswerType t) {
    return t == AnswerType::Boolean ? "Boolean" : "MultipleChoice";
}

AnswerType answer_type_from_string(const std::string& s) {
    if (s == "Boolean") return AnswerType::Boolean;
    if (s == "MultipleChoice") return AnswerType::MultipleChoice;
    throw DatasetError("unknown answer type '" + s + "'");
}

namespace {

[[noreturn]] void violation(const std::string& fact_id, const std::string& rule) {
    throw DatasetError("fact '" + fact_id + "': " + rule);
}

void validate_neighbor(const std::string& fact_id, const NeighborFact& nf) {
    if (nf.question.empty()) violation(fact_id, "neighbor question must be nonempty");
    if (nf.category == NeighborCategory::TA) {
        if (nf.answer_type != AnswerType::MultipleChoice)
            violation(fact_id, "TA neighbors must have answer_type MultipleChoice");
    } else {
        if (nf.answer_type != AnswerType::Boolean)
            violation(fact_id, "EP/LI neighbors must have answer_type Boolean");
    }
    if (nf.answer_type == AnswerType::Boolean) {
        if (nf.correct_answer != "Yes" && nf.correct_answer != "No")
            violation(fact_id, "Boolean neighbor correct_answer must be \"Yes\" or \"No\", got \"" +
                                   nf.correct_answer + "\"");
        if (!nf.options.empty())
            violation(fact_id, "Boolean neighbor must not carry options");
    } else {
        if (nf.options.empty())
            violation(fact_id, "MultipleChoice neighbor requires nonempty options");
        if (nf.options.size() > 26)
            violation(fact_id, "MultipleChoice neighbor has more than 26 options");
        if (nf.correct_answer.size() != 1 || nf.correct_answer[0] < 'A' ||
            nf.correct_answer[0] >= static_cast<char>('A' + nf.options.size()))
            violation(fact_id, "MultipleChoice correct_answer \"" + nf.correct_answer +
                                   "\" does not name one of the " +
                                   std::to_string(nf.options.size()) + " option labels");
    }
}

}  // namespace

void validate_neighborhood(const BeliefNeighborhood& n) {
    const std::string& id = n.target.id;
    if (id.empty()) throw DatasetError("fact with empty id");
    if (n.target.question.empty()) violation(id, "question must be nonempty");
    if (n.target.gold_entity.empty()) violation(id, "gold_entity must be nonempty");
    if (!n.target.misleading_entity.empty()) {
        const auto gold = normalize_entity(n.target.gold_entity);
        const auto misleading = normalize_entity(n.target.misleading_entity);
        if (gold.value == misleading.value)
            violation(id, "gold_entity and misleading_entity normalize to the same value \"" +
                              gold.value + "\"");
    }
    for (const auto& nf : n.neighbors) validate_neighbor(id, nf);
    for (const auto& mnf : n.misleading_neighbors) {
        if (mnf.statement.empty()) violation(id, "misleading neighbor statement must be nonempty");
        if (mnf.anchored_entity != n.target.misleading_entity)
            violation(id, "misleading neighbor anchored_entity \"" + mnf.anchored_entity +
                              "\" must equal the fact's misleading_entity");
    }
}

std::string serialize_neighborhood(const BeliefNeighborhood& n) {
    ordered_json j;
    j["id"] = n.target.id;
    j["domain"] = to_string(n.target.domain);
    j["question"] = n.target.question;
    j["gold_entity"] = n.target.gold_entity;
    j["misleading_entity"] = n.target.misleading_entity;
    j["neighbors"] = ordered_json::array();
    for (const auto& nf : n.neighbors) {
        ordered_json jn;
        jn["question"] = nf.question;
        jn["category"] = to_string(nf.category);
        jn["answer_type"] = to_string(nf.answer_type);
        jn["correct_answer"] = nf.correct_answer;
        if (!nf.options.empty()) jn["options"] = nf.options;
        if (nf.rationale) jn["rationale"] = *nf.rationale;
        j["neighbors"].push_back(std::move(jn));
    }
    j["misleading_neighbors"] = ordered_json::array();
    for (const auto& mnf : n.misleading_neighbors) {
        ordered_json jm;
        jm["statement"] = mnf.statement;
        jm["anchored_entity"] = mnf.anchored_entity;
        if (mnf.correct_answer) jm["correct_answer"] = *mnf.correct_answer;
        j["misleading_neighbors"].push_back(std::move(jm));
    }
    return j.dump();
}

BeliefNeighborhood parse_neighborhood(const std::string& line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("parse error: ") + e.what());
    }
    try {
        BeliefNeighborhood n;
        n.target.id = j.at("id").get<std::string>();
        n.target.domain = domain_from_string(j.at("domain").get<std::string>());
        n.target.question = j.at("question").get<std::string>();
        n.target.gold_entity = j.at("gold_entity").get<std::string>();
        n.target.misleading_entity = j.at("misleading_entity").get<std::string>();
        for (const auto& jn : j.at("neighbors")) {
            NeighborFact nf;
            nf.question = jn.at("question").get<std::string>();
            nf.category = neighbor_category_from_string(jn.at("category").get<std::string>());
            nf.answer_type = answer_type_from_string(jn.at("answer_type").get<std::string>());
            nf.correct_answer = jn.at("correct_answer").get<std::string>();
            if (jn.contains("options")) nf.options = jn.at("options").get<std::vector<std::string>>();
            if (jn.contains("rationale")) nf.rationale = jn.at("rationale").get<std::string>();
            n.neighbors.push_back(std::move(nf));
        }
        for (const auto& jm : j.at("misleading_neighbors")) {
            MisleadingNeighborFact mnf;
            mnf.statement = jm.at("statement").get<std::string>();
            mnf.anchored_entity = jm.at("anchored_entity").get<std::string>();
            if (jm.contains("correct_answer"))
                mnf.correct_answer = jm.at("correct_answer").get<std::string>();
            n.misleading_neighbors.push_back(std::move(mnf));
        }
        return n;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("schema error: ") + e.what());
    }
}

std::vector<BeliefNeighborhood> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset file: " + path);
    std::vector<BeliefNeighborhood> out;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        BeliefNeighborhood n;
        try {
            n = parse_neighborhood(line);
            validate_neighborhood(n);
        } catch (const DatasetError& e) {
            throw DatasetError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen_ids.insert(n.target.id).second)
            throw DatasetError(path + ":" + std::to_string(line_no) + ": duplicate id '" +
                               n.target.id + "'");
        out.push_back(std::move(n));
    }
    return out;
}

void save_dataset(const std::vector<BeliefNeighborhood>& facts, const std::string& path) {
    std::ostringstream buf;
    for (const auto& n : facts) buf << serialize_neighborhood(n) << '\n';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot open file for writing: " + path);
    out << buf.str();
    if (!out) throw DatasetError("write failed: " + path);
}

DatasetStats dataset_stats(const std::vector<BeliefNeighborhood>& facts) {
    DatasetStats stats;
    stats.total = facts.size();
    if (facts.empty()) return stats;
    double nf_sum = 0.0, mnf_sum = 0.0;
    for (const auto& n : facts) {
        stats.count_per_domain[n.target.domain]++;
        nf_sum += static_cast<double>(n.neighbors.size());
        mnf_sum += static_cast<double>(n.misleading_neighbors.size());
    }
    stats.mean_neighbors = nf_sum / static_cast<double>(facts.size());
    stats.mean_misleading_neighbors = mnf_sum / static_cast<double>(facts.size());
    return stats;
}

}  // namespace ncb

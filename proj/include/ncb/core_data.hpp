#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncb {

enum class Domain { STEM, ArtsCulture, SocialSciences, Sports, Other };

std::string to_string(Domain d);
// Unknown strings map to Other (with a warning pushed to `warnings` when
// given) rather than failing, so files from newer schema revisions still load.
Domain domain_from_string(const std::string& s, std::vector<std::string>* warnings = nullptr);

enum class NeighborCategory { EP, LI, TA };
enum class AnswerType { Boolean, MultipleChoice };

std::string to_string(NeighborCategory c);
NeighborCategory neighbor_category_from_string(const std::string& s);
std::string to_string(AnswerType t);
AnswerType answer_type_from_string(const std::string& s);

// The fact under test: a question with its gold answer entity and the
// plausible-but-wrong distractor entity used by the stress conditions.
struct TargetFact {
    std::string id;
    Domain domain = Domain::Other;
    std::string question;
    std::string gold_entity;
    std::string misleading_entity;

    bool operator==(const TargetFact&) const = default;
};

// A verification question anchored on the gold entity. EP/LI are Yes/No
// checks; TA is multiple choice with options labeled "A".."Z" in order.
struct NeighborFact {
    std::string question;
    NeighborCategory category = NeighborCategory::EP;
    AnswerType answer_type = AnswerType::Boolean;
    std::string correct_answer;
    std::vector<std::string> options;  // MultipleChoice only; label of options[i] is 'A'+i
    std::optional<std::string> rationale;

    bool operator==(const NeighborFact&) const = default;

    // Label ('A'..) for option index i.
    static char option_label(std::size_t i) { return static_cast<char>('A' + i); }
};

// A factually correct statement about the misleading entity. Statement form
// is canonical; a question/answer pair is admitted via `correct_answer`.
struct MisleadingNeighborFact {
    std::string statement;
    std::string anchored_entity;
    std::optional<std::string> correct_answer;

    bool operator==(const MisleadingNeighborFact&) const = default;
};

struct BeliefNeighborhood {
    TargetFact target;
    std::vector<NeighborFact> neighbors;
    std::vector<MisleadingNeighborFact> misleading_neighbors;

    bool operator==(const BeliefNeighborhood&) const = default;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checks every type invariant for one neighborhood; throws DatasetError
// naming the fact id and the violated rule.
void validate_neighborhood(const BeliefNeighborhood& n);

// Line-delimited records (one JSON object per line, UTF-8, canonical field
// order). Loading validates every record; errors carry the 1-based line
// number or the offending fact id.
std::vector<BeliefNeighborhood> load_dataset(const std::string& path);
void save_dataset(const std::vector<BeliefNeighborhood>& facts, const std::string& path);

std::string serialize_neighborhood(const BeliefNeighborhood& n);
BeliefNeighborhood parse_neighborhood(const std::string& line);

struct DatasetStats {
    std::map<Domain, std::size_t> count_per_domain;
    std::size_t total = 0;
    std::optional<double> mean_neighbors;             // absent for empty datasets
    std::optional<double> mean_misleading_neighbors;  // absent for empty datasets
};

DatasetStats dataset_stats(const std::vector<BeliefNeighborhood>& facts);

}  // namespace ncb

#include "ncb/records.hpp"

#include <stdexcept>

namespace ncb {

std::string to_string(QuestionKind k) {
    switch (k) {
        case QuestionKind::Target: return "target";
        case QuestionKind::Neighbor: return "neighbor";
        case QuestionKind::Stress: return "stress";
    }
    return "target";
}

QuestionKind question_kind_from_string(const std::string& s) {
    if (s == "target") return QuestionKind::Target;
    if (s == "neighbor") return QuestionKind::Neighbor;
    if (s == "stress") return QuestionKind::Stress;
    throw std::invalid_argument("unknown question kind '" + s + "'");
}

std::string ResponseRecord::cache_key() const {
    std::string key = fact_id;
    key += '|';
    key += to_string(kind);
    if (kind == QuestionKind::Neighbor) {
        key += ':';
        key += std::to_string(neighbor_index);
    }
    key += '|';
    key += condition_id;
    key += '|';
    key += std::to_string(sample_index);
    key += '|';
    key += backend_id;
    key += '|';
    key += template_version;
    return key;
}

}  // namespace ncb

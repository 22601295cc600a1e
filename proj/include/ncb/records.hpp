#pragma once

#include <optional>
#include <string>

#include "ncb/text.hpp"

namespace ncb {

enum class QuestionKind { Target, Neighbor, Stress };

std::string to_string(QuestionKind k);
QuestionKind question_kind_from_string(const std::string& s);

// One sampled model response under one condition. The tuple
// (fact_id, kind, neighbor_index, condition_id, sample_index, backend_id,
// template_version) is the cache key; records with equal keys are
// interchangeable.
struct ResponseRecord {
    std::string fact_id;
    QuestionKind kind = QuestionKind::Target;
    int neighbor_index = -1;       // >= 0 only for Neighbor records
    std::string condition_id;      // "baseline" or a stress condition id
    int sample_index = 0;
    std::string raw_text;
    std::optional<std::string> extracted_entity;  // present iff free-form extraction ran
    NormalizedEntity normalized;
    std::string backend_id;
    std::string template_version;
    std::string timestamp;   // ISO 8601 UTC, informational only
    std::string error_note;  // nonempty when the sample failed or fell back

    std::string cache_key() const;
};

}  // namespace ncb

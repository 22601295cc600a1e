#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ncb {

// A model answer after normalization. `valid` is false for refusals and for
// text that normalizes to nothing; such answers never count as matches but do
// count toward sample totals where the metric says so.
struct NormalizedEntity {
    std::string value;
    bool valid = false;

    bool operator==(const NormalizedEntity&) const = default;
};

// Case-insensitive refusal phrases, checked against both the raw text and its
// normalized form. Extensible per run; the defaults cover the common refusal
// wordings emitted by instruction-tuned models.
const std::vector<std::string>& default_refusal_lexicon();

// Lowercases ASCII, replaces punctuation and brackets (ASCII plus common
// Unicode punctuation) with spaces, collapses whitespace runs, and trims.
// Idempotent: normalizing a normalized value is a fixpoint.
NormalizedEntity normalize_entity(std::string_view raw);
NormalizedEntity normalize_entity(std::string_view raw,
                                  const std::vector<std::string>& refusal_lexicon);

// Mutual-substring match on normalized forms: true iff one normalized string
// contains the other. Throws std::invalid_argument when either side is
// invalid after normalization.
bool loose_match(std::string_view prediction, std::string_view gold);

}  // namespace ncb

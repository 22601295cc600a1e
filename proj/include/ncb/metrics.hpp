#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncb/core_data.hpp"
#include "ncb/records.hpp"

namespace ncb {

// How an expected answer is compared against samples: Boolean and
// MultipleChoice answers by exact normalized token, free-form answers by
// mutual substring.
enum class AnswerKind { Boolean, MultipleChoice, FreeForm };

AnswerKind answer_kind_for(AnswerType t);

// Fraction of samples that yield a valid entity. Throws on empty input.
double coverage(std::span<const ResponseRecord> records);

// Mean loose match against `gold` over valid records; 0 when no record is
// valid. Throws on empty input.
double accuracy(std::span<const ResponseRecord> records, const std::string& gold);

// Fraction of all records (refusals included in the denominator) whose answer
// matches `expected` under the given kind. Throws on empty input.
double empirical_frequency(std::span<const ResponseRecord> records, const std::string& expected,
                           AnswerKind kind);

struct NeighborFrequency {
    int neighbor_index = 0;
    NeighborCategory category = NeighborCategory::EP;
    double frequency = 0.0;
};

// Per-fact belief score: target frequency times the geometric mean of the
// neighbor frequencies. With no neighbors the score degrades to the target
// frequency itself.
struct NcbScore {
    std::string fact_id;
    double target_frequency = 0.0;
    std::vector<NeighborFrequency> neighbor_frequencies;
    std::size_t m = 0;
    double value = 0.0;
};

// Optional per-category weights for the weighted variant; exponents are
// w_i / sum(w) so equal weights reduce to the unweighted 1/m form.
struct CategoryWeights {
    double ep = 1.0;
    double li = 1.0;
    double ta = 1.0;

    double weight_for(NeighborCategory c) const;
};

double compute_ncb(double target_frequency, std::span<const double> neighbor_frequencies);
double compute_ncb_weighted(double target_frequency,
                            std::span<const NeighborFrequency> neighbor_frequencies,
                            const CategoryWeights& weights);

NcbScore make_ncb_score(std::string fact_id, double target_frequency,
                        std::vector<NeighborFrequency> neighbor_frequencies,
                        const std::optional<CategoryWeights>& weights = std::nullopt);

// Bottom/top groups after sorting ascending by (value, fact_id). Group size
// is floor(p*n), at least 1; throws when the groups would overlap.
struct StratifiedGroups {
    std::vector<NcbScore> low;
    std::vector<NcbScore> high;
};

StratifiedGroups stratify_by_ncb(std::span<const NcbScore> scores, double percentile);
// Absolute group size variant (reports often state N per group directly).
StratifiedGroups stratify_by_ncb_count(std::span<const NcbScore> scores, std::size_t group_n);

// Base minus stressed accuracy in percentage points. Inputs may be fractions
// or percentages; if either exceeds 1 both are read as percentages.
double drop_rate(double base_acc, double stressed_acc);

}  // namespace ncb

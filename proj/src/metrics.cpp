#include "ncb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncb {

AnswerKind answer_kind_for(AnswerType t) {
    return t == AnswerType::Boolean ? AnswerKind::Boolean : AnswerKind::MultipleChoice;
}

double coverage(std::span<const ResponseRecord> records) {
    if (records.empty()) throw std::invalid_argument("coverage: empty record set");
    std::size_t valid = 0;
    for (const auto& r : records)
        if (r.normalized.valid) ++valid;
    return static_cast<double>(valid) / static_cast<double>(records.size());
}

double accuracy(std::span<const ResponseRecord> records, const std::string& gold) {
    if (records.empty()) throw std::invalid_argument("accuracy: empty record set");
    std::size_t valid = 0, matched = 0;
    const auto g = normalize_entity(gold);
    for (const auto& r : records) {
        if (!r.normalized.valid) continue;
        ++valid;
        const std::string& p = r.normalized.value;
        if (p.find(g.value) != std::string::npos || g.value.find(p) != std::string::npos)
            ++matched;
    }
    if (valid == 0) return 0.0;
    return static_cast<double>(matched) / static_cast<double>(valid);
}

double empirical_frequency(std::span<const ResponseRecord> records, const std::string& expected,
                           AnswerKind kind) {
    if (records.empty()) throw std::invalid_argument("empirical_frequency: empty record set");
    const auto e = normalize_entity(expected);
    std::size_t hits = 0;
    for (const auto& r : records) {
        if (!r.normalized.valid) continue;  // refusals stay in the denominator
        const std::string& p = r.normalized.value;
        bool hit = false;
        if (kind == AnswerKind::FreeForm) {
            hit = p.find(e.value) != std::string::npos || e.value.find(p) != std::string::npos;
        } else {
            hit = p == e.value;
        }
        if (hit) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double CategoryWeights::weight_for(NeighborCategory c) const {
    switch (c) {
        case NeighborCategory::EP: return ep;
        case NeighborCategory::LI: return li;
        case NeighborCategory::TA: return ta;
    }
    return 1.0;
}

namespace {

void check_frequency(double f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw std::invalid_argument("frequency out of [0,1]: " + std::to_string(f));
}

// exp of the weight-normalized sum of logs; exact 0 as soon as any frequency
// with positive exponent is 0.
double weighted_geometric_mean(std::span<const double> values, std::span<const double> weights) {
    double total_weight = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
        total_weight += w;
    }
    double log_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) return 0.0;
        log_sum += weights[i] / total_weight * std::log(values[i]);
    }
    return std::exp(log_sum);
}

}  // namespace

double compute_ncb(double target_frequency, std::span<const double> neighbor_frequencies) {
    check_frequency(target_frequency);
    for (double f : neighbor_frequencies) check_frequency(f);
    if (neighbor_frequencies.empty()) return target_frequency;
    std::vector<double> weights(neighbor_frequencies.size(), 1.0);
    return target_frequency * weighted_geometric_mean(neighbor_frequencies, weights);
}

double compute_ncb_weighted(double target_frequency,
                            std::span<const NeighborFrequency> neighbor_frequencies,
                            const CategoryWeights& weights) {
    check_frequency(target_frequency);
    if (neighbor_frequencies.empty()) return target_frequency;
    std::vector<double> values, w;
    values.reserve(neighbor_frequencies.size());
    w.reserve(neighbor_frequencies.size());
    for (const auto& nf : neighbor_frequencies) {
        check_frequency(nf.frequency);
        values.push_back(nf.frequency);
        w.push_back(weights.weight_for(nf.category));
    }
    return target_frequency * weighted_geometric_mean(values, w);
}

NcbScore make_ncb_score(std::string fact_id, double target_frequency,
                        std::vector<NeighborFrequency> neighbor_frequencies,
                        const std::optional<CategoryWeights>& weights) {
    NcbScore score;
    score.fact_id = std::move(fact_id);
    score.target_frequency = target_frequency;
    score.m = neighbor_frequencies.size();
    if (weights) {
        score.value = compute_ncb_weighted(target_frequency, neighbor_frequencies, *weights);
    } else {
        std::vector<double> values;
        values.reserve(neighbor_frequencies.size());
        for (const auto& nf : neighbor_frequencies) values.push_back(nf.frequency);
        score.value = compute_ncb(target_frequency, values);
    }
    score.neighbor_frequencies = std::move(neighbor_frequencies);
    return score;
}

namespace {

StratifiedGroups stratify_sorted(std::span<const NcbScore> scores, std::size_t group_n,
                                 const char* what) {
    if (scores.empty()) throw std::invalid_argument("stratify: empty score list");
    if (group_n == 0) group_n = 1;
    if (2 * group_n > scores.size())
        throw std::invalid_argument(std::string("stratify: ") + what + " groups of " +
                                    std::to_string(group_n) + " overlap on " +
                                    std::to_string(scores.size()) + " facts");
    std::vector<NcbScore> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const NcbScore& a, const NcbScore& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.fact_id < b.fact_id;  // deterministic tie-break
    });
    StratifiedGroups groups;
    groups.low.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(group_n));
    groups.high.assign(sorted.end() - static_cast<std::ptrdiff_t>(group_n), sorted.end());
    return groups;
}

}  // namespace

StratifiedGroups stratify_by_ncb(std::span<const NcbScore> scores, double percentile) {
    if (!(percentile > 0.0 && percentile <= 0.5))
        throw std::invalid_argument("stratify: percentile must be in (0, 0.5]");
    const auto group_n =
        static_cast<std::size_t>(std::floor(percentile * static_cast<double>(scores.size())));
    return stratify_sorted(scores, group_n, "percentile");
}

StratifiedGroups stratify_by_ncb_count(std::span<const NcbScore> scores, std::size_t group_n) {
    if (group_n == 0) throw std::invalid_argument("stratify: group size must be >= 1");
    return stratify_sorted(scores, group_n, "absolute-N");
}

double drop_rate(double base_acc, double stressed_acc) {
    auto check = [](double v) {
        if (!(v >= 0.0 && v <= 100.0))
            throw std::invalid_argument("accuracy out of range: " + std::to_string(v));
    };
    check(base_acc);
    check(stressed_acc);
    const bool percent = base_acc > 1.0 || stressed_acc > 1.0;
    const double scale = percent ? 1.0 : 100.0;
    return (base_acc - stressed_acc) * scale;
}

}  // namespace ncb

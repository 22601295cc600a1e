#include "ncb/belief_math.hpp"

#include <cmath>
#include <stdexcept>

#include "ncb/rng.hpp"

namespace ncb {

std::string to_string(BeliefState s) {
    return s == BeliefState::Structured ? "structured" : "unstructured";
}

std::string to_string(Credibility c) {
    switch (c) {
        case Credibility::Low: return "low";
        case Credibility::Medium: return "medium";
        case Credibility::High: return "high";
    }
    return "low";
}

Credibility credibility_from_string(const std::string& s) {
    if (s == "low" || s == "Low") return Credibility::Low;
    if (s == "medium" || s == "Medium") return Credibility::Medium;
    if (s == "high" || s == "High") return Credibility::High;
    throw std::invalid_argument("unknown credibility level '" + s + "'");
}

void AgentProfile::validate() const {
    auto check = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument(std::string(name) + " out of [0,1]");
    };
    check(p_target, "p_target");
    check(p_neighbor_given_target, "p_neighbor_given_target");
    check(p_base, "p_base");
    check(conformity, "conformity");
    for (const auto& [level, w] : authority_weights) check(w, "authority weight");
    if (state == BeliefState::Structured && p_neighbor_given_target < p_base)
        throw std::invalid_argument("structured profile requires p_neighbor_given_target >= p_base");
}

OddsReport analytic_odds(std::span<const double> structured_likelihoods, double p_base,
                         double prior_odds) {
    if (structured_likelihoods.empty())
        throw std::invalid_argument("analytic_odds: m must be >= 1");
    if (!(p_base > 0.0 && p_base <= 1.0))
        throw std::invalid_argument("analytic_odds: p_base must be in (0,1]");
    if (!(prior_odds > 0.0)) throw std::invalid_argument("analytic_odds: prior odds must be > 0");
    double log_k = 0.0;
    for (double p : structured_likelihoods) {
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("analytic_odds: likelihoods must be in (0,1]");
        log_k += std::log(p);
    }
    log_k -= static_cast<double>(structured_likelihoods.size()) * std::log(p_base);
    OddsReport report;
    report.m = structured_likelihoods.size();
    report.prior_odds = prior_odds;
    report.bayes_factor = std::exp(log_k);
    report.posterior_odds = report.bayes_factor * prior_odds;
    return report;
}

namespace {

// Trials are consumed in fixed blocks so the draw stream per trial does not
// depend on how blocks are assigned to threads.
constexpr std::uint64_t kTrialBlock = 4096;

struct BlockCounts {
    std::uint64_t target_correct = 0;
    std::uint64_t all_neighbors_correct = 0;
    std::uint64_t all_correct = 0;
    std::vector<std::uint64_t> neighbor_correct;
};

BlockCounts run_block(const AgentProfile& profile, std::size_t m, std::uint64_t block_index,
                      std::uint64_t block_trials) {
    BlockCounts counts;
    counts.neighbor_correct.assign(m, 0);
    SplitMix64 rng(derive_seed(profile.rng_seed, block_index));
    const double p_neighbor = profile.neighbor_probability();
    for (std::uint64_t t = 0; t < block_trials; ++t) {
        const bool target_ok = rng.bernoulli(profile.p_target);
        bool neighbors_ok = true;
        for (std::size_t i = 0; i < m; ++i) {
            const bool ok = rng.bernoulli(p_neighbor);
            if (ok) ++counts.neighbor_correct[i];
            neighbors_ok = neighbors_ok && ok;
        }
        if (target_ok) ++counts.target_correct;
        if (neighbors_ok) ++counts.all_neighbors_correct;
        if (target_ok && neighbors_ok) ++counts.all_correct;
    }
    return counts;
}

JointOutcomeCounts accumulate_blocks(const AgentProfile& profile, std::size_t m,
                                     std::uint64_t trials, bool parallel) {
    profile.validate();
    JointOutcomeCounts total;
    total.trials = trials;
    total.neighbor_correct.assign(m, 0);
    if (trials == 0) return total;
    const std::uint64_t n_blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<BlockCounts> per_block(n_blocks);

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
            const auto block = static_cast<std::uint64_t>(b);
            const std::uint64_t bt = std::min(kTrialBlock, trials - block * kTrialBlock);
            per_block[block] = run_block(profile, m, block, bt);
        }
    } else {
        for (std::uint64_t b = 0; b < n_blocks; ++b) {
            const std::uint64_t bt = std::min(kTrialBlock, trials - b * kTrialBlock);
            per_block[b] = run_block(profile, m, b, bt);
        }
    }

    // summed in block order in both paths
    for (const auto& block : per_block) {
        total.target_correct += block.target_correct;
        total.all_neighbors_correct += block.all_neighbors_correct;
        total.all_correct += block.all_correct;
        for (std::size_t i = 0; i < m; ++i) total.neighbor_correct[i] += block.neighbor_correct[i];
    }
    return total;
}

}  // namespace

JointOutcomeCounts simulate_neighborhood_outcomes(const AgentProfile& profile, std::size_t m,
                                                  std::uint64_t trials) {
    return accumulate_blocks(profile, m, trials, /*parallel=*/true);
}

JointOutcomeCounts simulate_neighborhood_outcomes_serial(const AgentProfile& profile,
                                                         std::size_t m, std::uint64_t trials) {
    return accumulate_blocks(profile, m, trials, /*parallel=*/false);
}

std::optional<OddsReport> estimate_odds_monte_carlo(const AgentProfile& structured,
                                                    const AgentProfile& unstructured,
                                                    std::size_t m, std::uint64_t trials,
                                                    double prior_odds) {
    if (trials == 0) throw std::invalid_argument("estimate_odds_monte_carlo: trials must be >= 1");
    if (!(prior_odds > 0.0))
        throw std::invalid_argument("estimate_odds_monte_carlo: prior odds must be > 0");
    const auto s = simulate_neighborhood_outcomes(structured, m, trials);
    const auto u = simulate_neighborhood_outcomes(unstructured, m, trials);
    if (u.all_correct == 0) return std::nullopt;  // insufficient trials
    OddsReport report;
    report.m = m;
    report.prior_odds = prior_odds;
    report.bayes_factor = s.all_correct_fraction() / u.all_correct_fraction();
    report.posterior_odds = report.bayes_factor * prior_odds;
    return report;
}

std::vector<ProxyPoint> ncb_monotone_proxy_check(std::span<const AgentProfile> grid, std::size_t m,
                                                 double p_base, double prior_odds) {
    std::vector<ProxyPoint> points;
    points.reserve(grid.size());
    for (const auto& profile : grid) {
        profile.validate();
        const std::vector<double> likelihoods(m, profile.p_neighbor_given_target);
        ProxyPoint point;
        point.posterior_odds = analytic_odds(likelihoods, p_base, prior_odds).posterior_odds;
        // geometric mean of m equal likelihoods is the likelihood itself
        point.expected_ncb = profile.p_target * profile.p_neighbor_given_target;
        points.push_back(point);
    }
    return points;
}

bool proxy_is_monotone(std::span<const ProxyPoint> points) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].posterior_odds >= points[i - 1].posterior_odds &&
            points[i].expected_ncb < points[i - 1].expected_ncb)
            return false;
    }
    return true;
}

}  // namespace ncb

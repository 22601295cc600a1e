#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ncb {

enum class BeliefState { Structured, Unstructured };

std::string to_string(BeliefState s);

enum class Credibility { Low, Medium, High };

std::string to_string(Credibility c);
Credibility credibility_from_string(const std::string& s);

// Parametric simulated belief agent. Structured agents answer neighbor
// questions near-perfectly given a correct target answer; unstructured agents
// fall back to the baseline rate. `conformity` scales how readily the agent
// yields to contextual pressure.
struct AgentProfile {
    BeliefState state = BeliefState::Structured;
    double p_target = 1.0;
    double p_neighbor_given_target = 0.95;
    double p_base = 0.3;
    double conformity = 0.2;
    std::map<Credibility, double> authority_weights = {
        {Credibility::Low, 0.3}, {Credibility::Medium, 0.6}, {Credibility::High, 0.9}};
    std::uint64_t rng_seed = 0;

    double neighbor_probability() const {
        return state == BeliefState::Structured ? p_neighbor_given_target : p_base;
    }

    // Throws std::invalid_argument on out-of-range probabilities or a
    // Structured profile with p_neighbor_given_target < p_base.
    void validate() const;
};

// Posterior odds that the agent's belief state is structured, given an
// all-correct neighborhood observation.
struct OddsReport {
    double bayes_factor = 1.0;
    double prior_odds = 1.0;
    double posterior_odds = 1.0;
    std::size_t m = 0;
};

// Closed form under conditional independence and equal baseline target
// accuracy: K = prod(p_i) / p_base^m. Throws when m == 0, p_base == 0, or any
// likelihood is outside (0, 1].
OddsReport analytic_odds(std::span<const double> structured_likelihoods, double p_base,
                         double prior_odds);

// Counts from simulated neighborhood trials. all_correct requires the target
// and every neighbor correct in the same trial.
struct JointOutcomeCounts {
    std::uint64_t trials = 0;
    std::uint64_t target_correct = 0;
    std::uint64_t all_neighbors_correct = 0;
    std::uint64_t all_correct = 0;
    std::vector<std::uint64_t> neighbor_correct;  // marginal per neighbor index

    double all_correct_fraction() const {
        return trials ? static_cast<double>(all_correct) / static_cast<double>(trials) : 0.0;
    }
};

// Per-trial Bernoulli draws: target with p_target, neighbors i.i.d. with the
// state-dependent neighbor probability. Trials are partitioned into fixed
// blocks whose seeds derive from (rng_seed, block index), so the result is
// identical for any thread count.
JointOutcomeCounts simulate_neighborhood_outcomes(const AgentProfile& profile, std::size_t m,
                                                  std::uint64_t trials);
// Single-threaded reference implementation; must agree with the parallel
// kernel bit-for-bit.
JointOutcomeCounts simulate_neighborhood_outcomes_serial(const AgentProfile& profile,
                                                         std::size_t m, std::uint64_t trials);

// Ratio of all-correct empirical frequencies, scaled by the prior odds.
// Returns nullopt ("insufficient trials") when the unstructured agent never
// produces the all-correct event.
std::optional<OddsReport> estimate_odds_monte_carlo(const AgentProfile& structured,
                                                    const AgentProfile& unstructured,
                                                    std::size_t m, std::uint64_t trials,
                                                    double prior_odds);

// One grid point of the proxy check: analytic posterior odds next to the
// expected belief score implied by the same profile probabilities.
struct ProxyPoint {
    double posterior_odds = 0.0;
    double expected_ncb = 0.0;
};

std::vector<ProxyPoint> ncb_monotone_proxy_check(std::span<const AgentProfile> grid, std::size_t m,
                                                 double p_base, double prior_odds);

// True when expected NCB is nondecreasing wherever posterior odds are
// nondecreasing across consecutive grid points.
bool proxy_is_monotone(std::span<const ProxyPoint> points);

}  // namespace ncb

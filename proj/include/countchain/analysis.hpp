#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace countchain::analysis {

// Verifier incentive model: single-verifier expected utilities when every
// other verifier behaves honestly, in point units.
struct ExpectedUtilities {
    double no_search = 0;
    double search_false = 0;
    double search_true = 0;
};

struct UtilityProfile {
    double p_true = 0;  // fraction of propositions decided True
    double cost = 0;    // proof-search cost, > 0
    ExpectedUtilities utilities;
    double mixing = 0;  // share of search-true play
    double mixed_utility = 0;
};

ExpectedUtilities expected_utilities(double p_true, double cost);
/// x * (2 p - c) - p
double mixed_strategy_utility(double mixing, double p_true, double cost);
/// Honesty is a best response iff 2 p > c.
bool honest_equilibrium_holds(double p_true, double cost);
UtilityProfile utility_profile(double p_true, double cost, double mixing);

/// Fewest True tallies that decide a proposition True: n/2 for even n
/// (the submitter breaks ties), (n+1)/2 for odd n.
int decision_threshold(int num_verifiers);

/// P(a true proposition is decided True) when each of n verifiers votes
/// True independently with probability h.
double decision_probability(int num_verifiers, double honesty);

struct SybilSetting {
    std::int64_t total_nodes = 0;      // N
    std::int64_t dishonest_nodes = 0;  // D
    std::int64_t verifiers = 0;        // n
    std::int64_t majority = 0;         // k

    /// k = (n+1)/2 for odd n, n/2 + 1 for even n.
    static SybilSetting with_default_majority(std::int64_t total, std::int64_t dishonest, std::int64_t verifiers);
    void validate() const;
};

/// P(at least k of the n sampled verifiers are dishonest), hypergeometric
/// tail evaluated with exact big-integer binomials.
double sybil_majority_probability(const SybilSetting& setting);

/// Hypergeometric PMF over j = 0..n dishonest verifiers (zero where infeasible).
std::vector<double> hypergeometric_pmf(std::int64_t total, std::int64_t dishonest, std::int64_t verifiers);

struct AttackPoint {
    double corrupted_fraction = 0;
    double true_decision_rate = 0;
};

/// Expected True-decision rate under a Sybil attack: corrupted verifiers
/// always tally False, the rest vote True with probability `unhr`.
std::vector<AttackPoint> expected_attack_curve(std::int64_t total_nodes, int verifiers, double unhr,
                                               std::span<const double> fractions);

/// Number of corrupted nodes for a fraction of the network (round half away from zero).
std::int64_t corrupted_count(double fraction, std::int64_t total_nodes);

struct CountInterval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool contains(std::int64_t k) const { return lo <= k && k <= hi; }
};

/// Equal-tailed acceptance region of Binomial(trials, p) at the given confidence.
CountInterval binomial_interval(std::int64_t trials, double p, double confidence);

struct ProbabilityInterval {
    double lo = 0;
    double hi = 1;
    bool contains(double p) const { return lo <= p && p <= hi; }
};

/// Clopper-Pearson interval for a binomial proportion.
ProbabilityInterval clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence);

}  // namespace countchain::analysis

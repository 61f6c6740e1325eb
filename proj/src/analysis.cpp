#include "countchain/analysis.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>

#include "countchain/types.hpp"

namespace countchain::analysis {
namespace {

using boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

cpp_int choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    cpp_int r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

double ratio(const cpp_int& num, const cpp_int& den) {
    return static_cast<double>(BigFloat(num) / BigFloat(den));
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw CountChainError(std::string(what) + " must be in [0, 1]");
}

// P(Binomial(m, h) >= threshold)
double binomial_upper_tail(int m, double h, int threshold) {
    if (threshold <= 0) return 1.0;
    if (threshold > m) return 0.0;
    if (h <= 0.0) return 0.0;
    if (h >= 1.0) return 1.0;
    long double sum = 0;
    const long double hl = h;
    const long double ql = 1.0L - hl;
    for (int t = threshold; t <= m; ++t)
        sum += choose(m, t).convert_to<long double>() * std::pow(hl, t) * std::pow(ql, m - t);
    return static_cast<double>(std::min<long double>(sum, 1.0L));
}

}  // namespace

ExpectedUtilities expected_utilities(double p_true, double cost) {
    check_probability(p_true, "p_T");
    if (!(cost > 0.0)) throw CountChainError("cost must be > 0");
    return {-p_true, -p_true - cost, p_true - cost};
}

double mixed_strategy_utility(double mixing, double p_true, double cost) {
    check_probability(mixing, "x");
    check_probability(p_true, "p_T");
    if (!(cost > 0.0)) throw CountChainError("cost must be > 0");
    return mixing * (2.0 * p_true - cost) - p_true;
}

bool honest_equilibrium_holds(double p_true, double cost) { return 2.0 * p_true > cost; }

UtilityProfile utility_profile(double p_true, double cost, double mixing) {
    return {p_true, cost, expected_utilities(p_true, cost), mixing, mixed_strategy_utility(mixing, p_true, cost)};
}

int decision_threshold(int num_verifiers) {
    if (num_verifiers < 1) throw CountChainError("verifier count must be >= 1");
    return num_verifiers % 2 == 0 ? num_verifiers / 2 : (num_verifiers + 1) / 2;
}

double decision_probability(int num_verifiers, double honesty) {
    check_probability(honesty, "honesty");
    return binomial_upper_tail(num_verifiers, honesty, decision_threshold(num_verifiers));
}

SybilSetting SybilSetting::with_default_majority(std::int64_t total, std::int64_t dishonest, std::int64_t verifiers) {
    const std::int64_t k = verifiers % 2 == 0 ? verifiers / 2 + 1 : (verifiers + 1) / 2;
    return {total, dishonest, verifiers, k};
}

void SybilSetting::validate() const {
    if (total_nodes < 1) throw CountChainError("N must be >= 1");
    if (dishonest_nodes < 0 || dishonest_nodes > total_nodes) throw CountChainError("D must be in [0, N]");
    if (verifiers < 1 || verifiers > total_nodes) throw CountChainError("n must be in [1, N]");
    if (majority < 0) throw CountChainError("k must be >= 0");
}

double sybil_majority_probability(const SybilSetting& s) {
    s.validate();
    cpp_int num = 0;
    const std::int64_t top = std::min(s.verifiers, s.dishonest_nodes);
    for (std::int64_t j = std::max<std::int64_t>(s.majority, 0); j <= top; ++j)
        num += choose(s.dishonest_nodes, j) * choose(s.total_nodes - s.dishonest_nodes, s.verifiers - j);
    return ratio(num, choose(s.total_nodes, s.verifiers));
}

std::vector<double> hypergeometric_pmf(std::int64_t total, std::int64_t dishonest, std::int64_t verifiers) {
    SybilSetting{total, dishonest, verifiers, 0}.validate();
    const cpp_int den = choose(total, verifiers);
    std::vector<double> pmf(static_cast<std::size_t>(verifiers) + 1, 0.0);
    for (std::int64_t j = 0; j <= verifiers; ++j)
        pmf[static_cast<std::size_t>(j)] = ratio(choose(dishonest, j) * choose(total - dishonest, verifiers - j), den);
    return pmf;
}

std::int64_t corrupted_count(double fraction, std::int64_t total_nodes) {
    check_probability(fraction, "corrupted fraction");
    return std::llround(fraction * static_cast<double>(total_nodes));
}

std::vector<AttackPoint> expected_attack_curve(std::int64_t total_nodes, int verifiers, double unhr,
                                               std::span<const double> fractions) {
    check_probability(unhr, "unhr");
    const int threshold = decision_threshold(verifiers);
    std::vector<AttackPoint> curve;
    curve.reserve(fractions.size());
    for (double f : fractions) {
        const auto pmf = hypergeometric_pmf(total_nodes, corrupted_count(f, total_nodes), verifiers);
        double rate = 0;
        for (int j = 0; j <= verifiers; ++j) {
            if (pmf[static_cast<std::size_t>(j)] == 0.0) continue;
            rate += pmf[static_cast<std::size_t>(j)] * binomial_upper_tail(verifiers - j, unhr, threshold);
        }
        curve.push_back({f, rate});
    }
    return curve;
}

CountInterval binomial_interval(std::int64_t trials, double p, double confidence) {
    check_probability(p, "p");
    if (trials < 0) throw CountChainError("trials must be >= 0");
    if (!(confidence > 0.0 && confidence < 1.0)) throw CountChainError("confidence must be in (0, 1)");
    const double tail = (1.0 - confidence) / 2.0;
    if (p == 0.0) return {0, 0};
    if (p == 1.0) return {trials, trials};

    // Exact CDF walk in long double; trials here are at most a few thousand.
    std::vector<long double> pmf(static_cast<std::size_t>(trials) + 1);
    const long double lp = std::log(static_cast<long double>(p));
    const long double lq = std::log1p(-static_cast<long double>(p));
    for (std::int64_t k = 0; k <= trials; ++k) {
        const long double lc = std::lgamma(static_cast<long double>(trials) + 1) -
                               std::lgamma(static_cast<long double>(k) + 1) -
                               std::lgamma(static_cast<long double>(trials - k) + 1);
        pmf[static_cast<std::size_t>(k)] = std::exp(lc + k * lp + (trials - k) * lq);
    }
    CountInterval iv{0, trials};
    long double cdf = 0;
    bool lo_set = false;
    for (std::int64_t k = 0; k <= trials; ++k) {
        cdf += pmf[static_cast<std::size_t>(k)];
        if (!lo_set && cdf >= tail) {
            iv.lo = k;
            lo_set = true;
        }
        if (cdf >= 1.0L - tail) {
            iv.hi = k;
            break;
        }
    }
    return iv;
}

ProbabilityInterval clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence) {
    if (trials <= 0 || successes < 0 || successes > trials) throw CountChainError("invalid binomial sample");
    if (!(confidence > 0.0 && confidence < 1.0)) throw CountChainError("confidence must be in (0, 1)");
    using boost::math::binomial_distribution;
    const double alpha = (1.0 - confidence) / 2.0;
    const auto n = static_cast<double>(trials);
    const auto k = static_cast<double>(successes);
    ProbabilityInterval iv;
    iv.lo = successes == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(n, k, alpha);
    iv.hi = successes == trials ? 1.0 : binomial_distribution<>::find_upper_bound_on_p(n, k, alpha);
    return iv;
}

}  // namespace countchain::analysis

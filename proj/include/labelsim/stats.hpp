#pragma once

#include <cstdint>
#include <span>

#include "labelsim/core.hpp"
#include "labelsim/random.hpp"

namespace labelsim::stats {

// Probability that the correct label wins the majority vote after v queries.
// strict_prob counts only outcomes where its count strictly exceeds every
// other count; tie_resolved_prob adds the mass of top-ties, each weighted by
// the chance a uniform random tie-break selects it.
struct MajorityProbResult {
    double strict_prob = 0.0;
    double tie_resolved_prob = 0.0;
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

// Mult(v, p) = v!/(v_1!...v_l!) * prod p_k^{v_k}. The span form takes any
// distribution (entries >= 0 summing to 1), including ones with a tied
// maximum that ProbabilityVector rejects.
double multinomial_pmf(const VoteTally& tally, std::span<const double> probs);
double multinomial_pmf(const VoteTally& tally, const ProbabilityVector& p);

// Exact majority-win probability for l classes where the correct label has
// per-query probability q and the remaining mass is split uniformly.
// Requires l >= 2, v >= 1 and q >= (1-q)/(l-1); the uniform boundary
// (equality) is allowed.
MajorityProbResult strict_majority_prob_exact(int classes, double q, int validations);

// Monte Carlo counterpart of strict_majority_prob_exact's tie-resolved value:
// fraction of trials where a majority vote with random tie-break picks the
// correct label.
MonteCarloEstimate majority_prob_mc(int classes, double q, int validations,
                                    std::int64_t trials, RandomStream& rng);

// Goodness-of-fit statistic against the uniform distribution over l cells.
double chi_square_statistic(const VoteTally& counts);

// Upper-tail p-value of chi_square_statistic with l-1 degrees of freedom.
double chi_square_p_value(const VoteTally& counts);

// Index with the highest count; ties are broken uniformly at random.
LabelId majority_vote(const VoteTally& tally, RandomStream& rng);

// Regularized upper incomplete gamma Q(a, x); series expansion for
// x < a+1, continued fraction otherwise.
double regularized_gamma_q(double a, double x);

namespace detail {

// The two exact computation routes behind strict_majority_prob_exact:
// direct enumeration of all compositions of v into l cells, and
// conditioning on the correct-label count with a DP over the incorrect
// cells. Exposed so tests can pin their agreement.
MajorityProbResult majority_prob_by_enumeration(int classes, double q, int validations);
MajorityProbResult majority_prob_by_conditioning(int classes, double q, int validations);

// Number of compositions C(v+l-1, l-1), saturating at 2^63-1.
std::int64_t composition_count(int classes, int validations);

} // namespace detail

} // namespace labelsim::stats

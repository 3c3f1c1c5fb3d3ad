#include "labelsim/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace labelsim::stats {

namespace {

double log_gamma(double x) {
    int sign = 0;
    return lgamma_r(x, &sign);
}

// log i! for i in [0, n], built without lgamma so tables are cheap and
// race-free under concurrent callers.
std::vector<double> log_factorial_table(int n) {
    std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 2; i <= n; ++i) {
        lf[static_cast<std::size_t>(i)] =
            lf[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));
    }
    return lf;
}

// Series expansion of P(a, x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 2000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a+1.
double gamma_q_continued_fraction(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 2000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

void validate_majority_args(int classes, double q, int validations) {
    if (classes < 2) {
        throw std::invalid_argument("majority prob: need at least 2 classes");
    }
    if (validations < 1) {
        throw std::invalid_argument("majority prob: need at least 1 validation");
    }
    if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("majority prob: q outside [0,1]");
    }
}

MajorityProbResult clamp_result(long double strict, long double tie_resolved) {
    auto clamp01 = [](long double x) {
        return static_cast<double>(x < 0.0L ? 0.0L : (x > 1.0L ? 1.0L : x));
    };
    MajorityProbResult r;
    r.strict_prob = clamp01(strict);
    r.tie_resolved_prob = clamp01(tie_resolved);
    if (r.tie_resolved_prob < r.strict_prob) {
        r.tie_resolved_prob = r.strict_prob;
    }
    return r;
}

} // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) {
        throw std::invalid_argument("regularized_gamma_q: a must be positive");
    }
    if (!(x >= 0.0)) {
        throw std::invalid_argument("regularized_gamma_q: x must be non-negative");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_continued_fraction(a, x);
}

double multinomial_pmf(const VoteTally& tally, std::span<const double> probs) {
    if (static_cast<std::size_t>(tally.classes()) != probs.size()) {
        throw std::invalid_argument("multinomial_pmf: tally and p dimensions differ");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("multinomial_pmf: negative probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("multinomial_pmf: probabilities do not sum to 1");
    }
    const std::int64_t n = tally.total();
    if (n == 0) {
        return 1.0;
    }
    double lp = log_gamma(static_cast<double>(n) + 1.0);
    for (int k = 0; k < tally.classes(); ++k) {
        const std::int64_t c = tally[k];
        if (c == 0) {
            continue;
        }
        const double p = probs[static_cast<std::size_t>(k)];
        if (p == 0.0) {
            return 0.0;
        }
        lp -= log_gamma(static_cast<double>(c) + 1.0);
        lp += static_cast<double>(c) * std::log(p);
    }
    return std::exp(lp);
}

double multinomial_pmf(const VoteTally& tally, const ProbabilityVector& p) {
    return multinomial_pmf(tally, std::span<const double>(p.probs()));
}

double chi_square_statistic(const VoteTally& counts) {
    const std::int64_t n = counts.total();
    const int l = counts.classes();
    if (n < 1) {
        throw std::invalid_argument("chi_square_statistic: empty tally");
    }
    if (l < 2) {
        throw std::invalid_argument("chi_square_statistic: need at least 2 classes");
    }
    const double expected = static_cast<double>(n) / static_cast<double>(l);
    double stat = 0.0;
    for (int k = 0; k < l; ++k) {
        const double diff = static_cast<double>(counts[k]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

double chi_square_p_value(const VoteTally& counts) {
    const double stat = chi_square_statistic(counts);
    const double df = static_cast<double>(counts.classes() - 1);
    return regularized_gamma_q(df / 2.0, stat / 2.0);
}

LabelId majority_vote(const VoteTally& tally, RandomStream& rng) {
    if (tally.total() < 1) {
        throw std::invalid_argument("majority_vote: empty tally");
    }
    std::int64_t best = -1;
    int mult = 0;
    for (int k = 0; k < tally.classes(); ++k) {
        if (tally[k] > best) {
            best = tally[k];
            mult = 1;
        } else if (tally[k] == best) {
            ++mult;
        }
    }
    int pick = mult > 1 ? static_cast<int>(rng.next_below(static_cast<std::uint64_t>(mult))) : 0;
    for (int k = 0; k < tally.classes(); ++k) {
        if (tally[k] == best && pick-- == 0) {
            return k;
        }
    }
    return tally.classes() - 1; // unreachable
}

namespace detail {

std::int64_t composition_count(int classes, int validations) {
    long double r = 1.0L;
    for (int k = 1; k <= classes - 1; ++k) {
        r *= static_cast<long double>(validations + k) / static_cast<long double>(k);
        if (r > 9e18L) {
            return std::numeric_limits<std::int64_t>::max();
        }
    }
    return static_cast<std::int64_t>(r + 0.5L);
}

MajorityProbResult majority_prob_by_enumeration(int classes, double q, int validations) {
    validate_majority_args(classes, q, validations);
    const double w = 1.0 - q;
    if (w == 0.0) {
        return {1.0, 1.0};
    }
    if (q == 0.0) {
        return {0.0, 0.0};
    }
    if (validations == 1) {
        return {q, q}; // a single vote is correct with probability exactly q
    }

    const int cells = classes - 1;
    const double pk = w / static_cast<double>(cells);
    const double lq = std::log(q);
    const double lpk = std::log(pk);
    const auto lf = log_factorial_table(validations);

    long double strict = 0.0L;
    long double tie = 0.0L;

    // Walk all compositions of the incorrect total over `cells` labels,
    // keeping the running max count and its multiplicity.
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
    for (int c0 = validations; c0 >= 0; --c0) {
        const int t = validations - c0;
        const double base = lf[static_cast<std::size_t>(validations)] -
                            lf[static_cast<std::size_t>(c0)] + c0 * lq + t * lpk;

        auto visit = [&](auto&& self, int cell, int rem, double acc, int mx, int mult) -> void {
            if (cell == cells - 1) {
                const int c = rem;
                const double lp = base + acc - lf[static_cast<std::size_t>(c)];
                int fmx = mx, fmult = mult;
                if (c > fmx) {
                    fmx = c;
                    fmult = 1;
                } else if (c == fmx) {
                    ++fmult;
                }
                if (c0 > fmx) {
                    strict += std::exp(lp);
                } else if (c0 == fmx) {
                    tie += std::exp(lp) / static_cast<double>(fmult + 1);
                }
                return;
            }
            for (int c = 0; c <= rem; ++c) {
                int nmx = mx, nmult = mult;
                if (c > nmx) {
                    nmx = c;
                    nmult = 1;
                } else if (c == nmx) {
                    ++nmult;
                }
                self(self, cell + 1, rem - c, acc - lf[static_cast<std::size_t>(c)], nmx, nmult);
            }
        };
        visit(visit, 0, t, 0.0, -1, 0);
    }
    return clamp_result(strict, strict + tie);
}

MajorityProbResult majority_prob_by_conditioning(int classes, double q, int validations) {
    validate_majority_args(classes, q, validations);
    const double w = 1.0 - q;
    if (w == 0.0) {
        return {1.0, 1.0};
    }
    if (q == 0.0) {
        return {0.0, 0.0};
    }
    if (validations == 1) {
        return {q, q};
    }

    const int cells = classes - 1;
    const int v = validations;
    const double lq = std::log(q);
    const double lw = std::log(w);
    const auto lf = log_factorial_table(v);

    // below[i][r] = P(multinomial(r, uniform over i cells) keeps every cell
    // count <= cap); rebuilt per correct-count m with cap = m-1.
    std::vector<std::vector<double>> below(static_cast<std::size_t>(cells) + 1,
                                           std::vector<double>(static_cast<std::size_t>(v) + 1, 0.0));

    auto lchoose = [&lf](int n, int k) {
        return lf[static_cast<std::size_t>(n)] - lf[static_cast<std::size_t>(k)] -
               lf[static_cast<std::size_t>(n - k)];
    };

    long double strict = 0.0L;
    long double tie = 0.0L;

    for (int m = 1; m <= v; ++m) {
        const int t = v - m;
        const double lpb = lf[static_cast<std::size_t>(v)] - lf[static_cast<std::size_t>(m)] -
                           lf[static_cast<std::size_t>(t)] + m * lq + t * lw;
        if (lpb < -745.0) {
            continue;
        }
        const double pb = std::exp(lpb);
        const int cap = m - 1;

        below[0][0] = 1.0;
        for (int r = 1; r <= t; ++r) below[0][static_cast<std::size_t>(r)] = 0.0;
        for (int r = 0; r <= t; ++r) {
            below[1][static_cast<std::size_t>(r)] = r <= cap ? 1.0 : 0.0;
        }
        for (int i = 2; i <= cells; ++i) {
            const double li = -std::log(static_cast<double>(i));
            const double lrest = std::log1p(-1.0 / static_cast<double>(i));
            for (int rr = 0; rr <= t; ++rr) {
                const int cmax = cap < rr ? cap : rr;
                double acc = 0.0;
                for (int c = 0; c <= cmax; ++c) {
                    const double lb = lchoose(rr, c) + c * li + (rr - c) * lrest;
                    acc += std::exp(lb) * below[static_cast<std::size_t>(i - 1)]
                                               [static_cast<std::size_t>(rr - c)];
                }
                below[static_cast<std::size_t>(i)][static_cast<std::size_t>(rr)] = acc;
            }
        }

        strict += pb * below[static_cast<std::size_t>(cells)][static_cast<std::size_t>(t)];

        double choose_cd = static_cast<double>(cells); // C(cells, d), updated per d
        for (int d = 1; d <= cells; ++d) {
            if (static_cast<std::int64_t>(d) * m > t) {
                break;
            }
            const int rem = t - d * m;
            if (cells - d == 0 && rem > 0) {
                choose_cd *= static_cast<double>(cells - d) / static_cast<double>(d + 1);
                continue;
            }
            double lcnt = lf[static_cast<std::size_t>(t)] - d * lf[static_cast<std::size_t>(m)] -
                          lf[static_cast<std::size_t>(rem)] -
                          static_cast<double>(d) * m * std::log(static_cast<double>(cells));
            if (rem > 0) {
                lcnt += rem * std::log1p(-static_cast<double>(d) / static_cast<double>(cells));
            }
            const double sub =
                below[static_cast<std::size_t>(cells - d)][static_cast<std::size_t>(rem)];
            tie += pb * choose_cd * std::exp(lcnt) * sub / static_cast<double>(d + 1);
            choose_cd *= static_cast<double>(cells - d) / static_cast<double>(d + 1);
        }
    }
    return clamp_result(strict, strict + tie);
}

} // namespace detail

MajorityProbResult strict_majority_prob_exact(int classes, double q, int validations) {
    validate_majority_args(classes, q, validations);
    // Boundary q == 1/l (uniform) is admissible; the comparison carries a
    // small relative slack so q arriving as 1-w does not trip on rounding.
    if (q * static_cast<double>(classes) < 1.0 - 1e-9) {
        throw std::invalid_argument(
            "strict_majority_prob_exact: correct label must be at least as probable as "
            "every incorrect label (q >= (1-q)/(l-1))");
    }
    constexpr std::int64_t kEnumerationLimit = 2'000'000;
    if (detail::composition_count(classes, validations) <= kEnumerationLimit) {
        return detail::majority_prob_by_enumeration(classes, q, validations);
    }
    return detail::majority_prob_by_conditioning(classes, q, validations);
}

MonteCarloEstimate majority_prob_mc(int classes, double q, int validations,
                                    std::int64_t trials, RandomStream& rng) {
    validate_majority_args(classes, q, validations);
    if (trials < 1) {
        throw std::invalid_argument("majority_prob_mc: need at least 1 trial");
    }
    const double w = 1.0 - q;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(classes), 0);
    std::int64_t wins = 0;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < validations; ++i) {
            const double u = rng.next_double();
            int label = 0;
            if (u >= q) {
                int idx = static_cast<int>((u - q) / w * static_cast<double>(classes - 1));
                if (idx > classes - 2) idx = classes - 2;
                label = idx + 1;
            }
            ++counts[static_cast<std::size_t>(label)];
        }
        std::int64_t best = -1;
        int mult = 0;
        for (int k = 0; k < classes; ++k) {
            if (counts[static_cast<std::size_t>(k)] > best) {
                best = counts[static_cast<std::size_t>(k)];
                mult = 1;
            } else if (counts[static_cast<std::size_t>(k)] == best) {
                ++mult;
            }
        }
        int winner;
        if (mult == 1) {
            winner = 0;
            while (counts[static_cast<std::size_t>(winner)] != best) ++winner;
        } else {
            int pick = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(mult)));
            winner = 0;
            for (int k = 0; k < classes; ++k) {
                if (counts[static_cast<std::size_t>(k)] == best && pick-- == 0) {
                    winner = k;
                    break;
                }
            }
        }
        if (winner == 0) {
            ++wins;
        }
    }
    MonteCarloEstimate est;
    est.trials = trials;
    est.mean = static_cast<double>(wins) / static_cast<double>(trials);
    est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(trials));
    return est;
}

} // namespace labelsim::stats

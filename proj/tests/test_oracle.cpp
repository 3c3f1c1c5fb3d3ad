#include <doctest.h>

#include <cmath>
#include <vector>

#include "labelsim/oracle.hpp"
#include "labelsim/stats.hpp"

using namespace labelsim;

namespace {
const Example kExample{17, 4, {}};
}

TEST_CASE("zero noise always returns the true label") {
    const UniformNoiseOracle oracle(10, 0.0);
    auto rng = derive_stream(0, 0);
    for (int i = 0; i < 1000; ++i) {
        CHECK(oracle.query(kExample, rng) == 4);
    }
}

TEST_CASE("rejects labels outside the class range") {
    const UniformNoiseOracle oracle(10, 0.2);
    auto rng = derive_stream(0, 0);
    CHECK_THROWS_AS(oracle.query(Example{0, 10, {}}, rng), std::invalid_argument);
    CHECK_THROWS_AS(UniformNoiseOracle(10, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(UniformNoiseOracle(10, -0.01), std::invalid_argument);
}

TEST_CASE("correct-label frequency matches q within 4 sigma (w=0.2, 1e6 queries)") {
    const UniformNoiseOracle oracle(10, 0.2);
    auto rng = derive_stream(11, 0);
    std::int64_t correct = 0;
    constexpr std::int64_t kQueries = 1000000;
    for (std::int64_t i = 0; i < kQueries; ++i) {
        correct += oracle.query(kExample, rng) == kExample.true_label ? 1 : 0;
    }
    const double freq = static_cast<double>(correct) / kQueries;
    CHECK(freq >= 0.7984);
    CHECK(freq <= 0.8016);
}

TEST_CASE("w=0.9 boundary makes every label equally likely") {
    const UniformNoiseOracle oracle(10, 0.9);
    auto rng = derive_stream(12, 0);
    VoteTally tally(10);
    for (int i = 0; i < 1000000; ++i) {
        tally.add(oracle.query(kExample, rng));
    }
    CHECK(stats::chi_square_p_value(tally) > 0.001);
}

TEST_CASE("query_n totals and multinomial 4-sigma cell bounds") {
    const UniformNoiseOracle oracle(10, 0.2);
    auto rng = derive_stream(13, 0);
    const auto one = oracle.query_n(kExample, 1, rng);
    CHECK(one.total() == 1);

    const UniformNoiseOracle clean(10, 0.0);
    const auto five = clean.query_n(kExample, 5, rng);
    CHECK(five[kExample.true_label] == 5);

    constexpr std::int64_t kQueries = 1000000;
    const auto big = oracle.query_n(kExample, kQueries, rng);
    CHECK(big.total() == kQueries);
    for (int k = 0; k < 10; ++k) {
        const double p = k == kExample.true_label ? 0.8 : 0.2 / 9.0;
        const double expected = p * kQueries;
        const double sigma = std::sqrt(kQueries * p * (1.0 - p));
        CHECK(std::abs(static_cast<double>(big[k]) - expected) <= 4.0 * sigma);
    }
}

TEST_CASE("query_n(a+b) equals query_n(a) then query_n(b) on one stream") {
    const UniformNoiseOracle oracle(10, 0.3);
    auto rng1 = derive_stream(14, 0);
    const auto whole = oracle.query_n(kExample, 400, rng1);

    auto rng2 = derive_stream(14, 0);
    auto part1 = oracle.query_n(kExample, 150, rng2);
    const auto part2 = oracle.query_n(kExample, 250, rng2);
    for (int k = 0; k < 10; ++k) {
        part1.add(k, part2[k]);
    }
    CHECK(part1.counts() == whole.counts());
}

TEST_CASE("replaying the stream reproduces the identical label sequence") {
    const UniformNoiseOracle oracle(10, 0.5);
    auto a = derive_stream(15, 3);
    auto b = derive_stream(15, 3);
    for (int i = 0; i < 1000; ++i) {
        CHECK(oracle.query(kExample, a) == oracle.query(kExample, b));
    }
}

TEST_CASE("consecutive queries are independent (chi-square on pairs)") {
    const UniformNoiseOracle oracle(4, 0.6);
    const Example ex{1, 0, {}};
    auto rng = derive_stream(16, 0);
    constexpr std::int64_t kPairs = 1000000;
    std::vector<std::int64_t> joint(16, 0);
    std::vector<std::int64_t> first(4, 0), second(4, 0);
    for (std::int64_t i = 0; i < kPairs; ++i) {
        const auto a = oracle.query(ex, rng);
        const auto b = oracle.query(ex, rng);
        ++joint[static_cast<std::size_t>(a * 4 + b)];
        ++first[static_cast<std::size_t>(a)];
        ++second[static_cast<std::size_t>(b)];
    }
    double stat = 0.0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const double expected = static_cast<double>(first[static_cast<std::size_t>(a)]) *
                                    static_cast<double>(second[static_cast<std::size_t>(b)]) /
                                    static_cast<double>(kPairs);
            const double diff = static_cast<double>(joint[static_cast<std::size_t>(a * 4 + b)]) -
                                expected;
            stat += diff * diff / expected;
        }
    }
    // df = (4-1)^2 = 9
    CHECK(stats::regularized_gamma_q(4.5, stat / 2.0) > 0.001);
}

TEST_CASE("vector oracle samples an arbitrary distribution") {
    const VectorOracle oracle(ProbabilityVector({0.5, 0.25, 0.15, 0.1}, 0));
    const Example ex{0, 0, {}};
    auto rng = derive_stream(17, 0);
    VoteTally tally(4);
    constexpr std::int64_t kQueries = 400000;
    for (std::int64_t i = 0; i < kQueries; ++i) {
        tally.add(oracle.query(ex, rng));
    }
    const double probs[] = {0.5, 0.25, 0.15, 0.1};
    for (int k = 0; k < 4; ++k) {
        const double expected = probs[k] * kQueries;
        const double sigma = std::sqrt(kQueries * probs[k] * (1.0 - probs[k]));
        CHECK(std::abs(static_cast<double>(tally[k]) - expected) <= 4.0 * sigma);
    }
}

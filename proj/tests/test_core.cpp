#include <doctest.h>

#include "labelsim/core.hpp"

using namespace labelsim;

TEST_CASE("uniform noise vector: ten classes at w=0.2") {
    const auto p = make_uniform_noise_vector(10, 0.2, 3);
    CHECK(p.classes() == 10);
    CHECK(p.correct_index() == 3);
    CHECK(p[3] == doctest::Approx(0.8).epsilon(1e-15));
    for (int k = 0; k < 10; ++k) {
        if (k != 3) CHECK(p[k] == doctest::Approx(0.2 / 9.0).epsilon(1e-15));
    }
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) sum += p[k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(p.q() == doctest::Approx(0.8));
    CHECK(p.w() == doctest::Approx(0.2));
}

TEST_CASE("uniform noise vector: zero noise and binary complement") {
    const auto zero = make_uniform_noise_vector(10, 0.0, 0);
    CHECK(zero[0] == 1.0);
    for (int k = 1; k < 10; ++k) CHECK(zero[k] == 0.0);

    const auto binary = make_uniform_noise_vector(2, 0.4, 1);
    CHECK(binary[0] == doctest::Approx(0.4));
    CHECK(binary[1] == doctest::Approx(0.6));
}

TEST_CASE("uniform noise vector: argmax is always the correct index") {
    for (int l : {2, 3, 5, 10}) {
        for (double w : {0.0, 0.1, 0.3, 0.49}) {
            const auto p = make_uniform_noise_vector(l, w, l - 1);
            int argmax = 0;
            for (int k = 1; k < l; ++k) {
                if (p[k] > p[argmax]) argmax = k;
            }
            CHECK(argmax == l - 1);
        }
    }
}

TEST_CASE("uniform noise vector rejects w outside [0, (l-1)/l)") {
    CHECK_THROWS_AS(make_uniform_noise_vector(10, 0.9, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_noise_vector(10, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_noise_vector(10, -0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_noise_vector(2, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_noise_vector(1, 0.0, 0), std::invalid_argument);
}

TEST_CASE("probability vector rejects ties for the top label") {
    CHECK_THROWS_AS(ProbabilityVector({0.4, 0.4, 0.2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.5}, 0), std::invalid_argument);
    CHECK_NOTHROW(ProbabilityVector({0.5, 0.3, 0.2}, 0));
}

TEST_CASE("probability vector validates sum and range") {
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.4}, 0), std::invalid_argument);
    CHECK_THROWS_AS(ProbabilityVector({1.2, -0.2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(ProbabilityVector({0.9, 0.1}, 2), std::invalid_argument);
}

TEST_CASE("vote tally accumulates and validates") {
    VoteTally t(3);
    CHECK(t.total() == 0);
    t.add(1);
    t.add(1);
    t.add(2);
    CHECK(t.total() == 3);
    CHECK(t[1] == 2);
    CHECK_THROWS_AS(t.add(3), std::invalid_argument);
    CHECK_THROWS_AS(VoteTally(std::vector<std::int64_t>{1, -1}), std::invalid_argument);
}

TEST_CASE("budget ledger refuses over-consumption and stays unchanged") {
    BudgetLedger ledger(5);
    ledger.consume(3);
    CHECK(ledger.consumed() == 3);
    CHECK(ledger.remaining() == 2);
    CHECK_THROWS_AS(ledger.consume(3), BudgetError);
    CHECK(ledger.consumed() == 3);
    ledger.consume(2);
    CHECK(ledger.remaining() == 0);
    CHECK_THROWS_AS(ledger.consume(1), BudgetError);
    CHECK(ledger.consumed_fraction() == doctest::Approx(1.0));
}

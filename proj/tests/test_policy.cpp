#include <doctest.h>

#include <sstream>

#include "labelsim/campaign.hpp"
#include "labelsim/policy.hpp"
#include "labelsim/stats.hpp"

using namespace labelsim;

namespace {

BudgetLedger ample() { return BudgetLedger(1000000); }

VoteTally tally_of(std::vector<std::int64_t> counts) { return VoteTally(std::move(counts)); }

} // namespace

TEST_CASE("policy grammar parses and formats") {
    const auto fixed = parse_policy("fixed:v=5");
    CHECK(std::get<FixedPolicy>(fixed).v == 5);
    CHECK(format_policy(fixed) == "fixed:v=5");

    const auto sched = parse_policy("scheduled:stages=1,3,5,7;frac=0.1");
    CHECK(std::get<ScheduledPolicy>(sched).stages == std::vector<int>{1, 3, 5, 7});
    CHECK(std::get<ScheduledPolicy>(sched).stage_fraction == doctest::Approx(0.1));

    const auto sched_default = parse_policy("scheduled:stages=2,4");
    CHECK(std::get<ScheduledPolicy>(sched_default).stage_fraction == doctest::Approx(0.1));

    const auto chi = parse_policy("chi:threshold=0.05;cap=0");
    CHECK(std::get<ChiSquarePolicy>(chi).threshold == doctest::Approx(0.05));
    CHECK(std::get<ChiSquarePolicy>(chi).cap == 0);

    const auto chi_defaults = parse_policy("chi:");
    CHECK(std::get<ChiSquarePolicy>(chi_defaults).threshold == doctest::Approx(0.05));

    for (const char* bad :
         {"fixed", "fixed:v=0", "fixed:x=3", "scheduled:stages=5,3", "scheduled:stages=",
          "chi:threshold=1.5", "chi:threshold=0", "mystery:v=1", "fixed:v=abc",
          "scheduled:stages=1,2;frac=0"}) {
        CHECK_THROWS_AS(parse_policy(bad), std::invalid_argument);
    }
}

TEST_CASE("decide: fixed policy counts up to v") {
    const Policy policy = FixedPolicy{3};
    auto budget = ample();
    CHECK(decide(policy, VoteTally(10), budget) == PolicyDecision::Continue);
    CHECK(decide(policy, tally_of({2, 0, 0}), budget) == PolicyDecision::Continue);
    CHECK(decide(policy, tally_of({2, 1, 0}), budget) == PolicyDecision::Finalize);
    CHECK(decide(policy, tally_of({4, 0, 0}), budget) == PolicyDecision::Finalize);
}

TEST_CASE("decide: chi policy finalizes on the worked tallies") {
    const Policy policy = ChiSquarePolicy{0.05, 0};
    auto budget = ample();
    CHECK(decide(policy, tally_of({0, 0, 7, 0, 1, 0, 2, 0, 0, 0}), budget) ==
          PolicyDecision::Finalize);
    // X^2 = 18, df = 9 -> p ~ 0.035 < 0.05 after only two agreeing queries.
    CHECK(decide(policy, tally_of({2, 0, 0, 0, 0, 0, 0, 0, 0, 0}), budget) ==
          PolicyDecision::Finalize);
    CHECK(decide(policy, tally_of({1, 0, 0, 0, 0, 0, 0, 0, 0, 0}), budget) ==
          PolicyDecision::Continue);
    CHECK(decide(policy, VoteTally(10), budget) == PolicyDecision::Continue);
}

TEST_CASE("decide: empty budget always finalizes") {
    BudgetLedger spent(4);
    spent.consume(4);
    CHECK(decide(FixedPolicy{9}, tally_of({1, 0}), spent) == PolicyDecision::Finalize);
    CHECK(decide(ChiSquarePolicy{}, VoteTally(10), spent) == PolicyDecision::Finalize);
}

TEST_CASE("current_stage_v maps consumed fraction onto stages") {
    const ScheduledPolicy sched{{1, 3, 5, 7}, 0.10};
    BudgetLedger budget(10000);
    auto at_fraction = [&](double f) {
        BudgetLedger b(10000);
        b.consume(static_cast<std::int64_t>(f * 10000));
        return current_stage_v(sched, b);
    };
    CHECK(at_fraction(0.05) == 1);
    CHECK(at_fraction(0.15) == 3);
    CHECK(at_fraction(0.25) == 5);
    CHECK(at_fraction(0.35) == 7);
    CHECK(at_fraction(0.95) == 7);
    CHECK(at_fraction(0.10) == 3); // boundary switches to the next stage
    CHECK(at_fraction(0.30) == 7);

    const ScheduledPolicy table3{{11, 15, 25, 51}, 0.10};
    BudgetLedger b31(10000);
    b31.consume(3100);
    CHECK(current_stage_v(table3, b31) == 51);

    const ScheduledPolicy single{{5}, 0.10};
    for (double f : {0.0, 0.2, 0.7, 1.0}) {
        BudgetLedger b(10000);
        b.consume(static_cast<std::int64_t>(f * 10000));
        CHECK(current_stage_v(single, b) == 5);
    }
}

TEST_CASE("validate_example: fixed v=1 uses exactly one query") {
    const UniformNoiseOracle oracle(10, 0.2);
    const Example ex{5, 2, {}};
    auto budget = ample();
    auto rng = derive_stream(1, 5);

    auto probe = derive_stream(1, 5);
    const LabelId expected = oracle.query(ex, probe);

    const auto out = validate_example(FixedPolicy{1}, oracle, ex, budget, rng);
    CHECK(out.queries_used == 1);
    CHECK(out.tally.total() == 1);
    CHECK(out.label == expected);
    CHECK(out.reason == FinalizeReason::Policy);
    CHECK(budget.consumed() == 1);
}

TEST_CASE("validate_example: fixed v=5 with zero noise returns the true label") {
    const UniformNoiseOracle oracle(10, 0.0);
    const Example ex{5, 7, {}};
    auto budget = ample();
    auto rng = derive_stream(2, 5);
    const auto out = validate_example(FixedPolicy{5}, oracle, ex, budget, rng);
    CHECK(out.queries_used == 5);
    CHECK(out.label == 7);
    CHECK(out.tally[7] == 5);
    CHECK(out.peaked);
}

TEST_CASE("validate_example: budget truncation keeps the partial tally") {
    const UniformNoiseOracle oracle(10, 0.0);
    const Example ex{0, 1, {}};
    BudgetLedger budget(3);
    auto rng = derive_stream(3, 0);
    const auto out = validate_example(FixedPolicy{10}, oracle, ex, budget, rng);
    CHECK(out.queries_used == 3);
    CHECK(out.reason == FinalizeReason::Budget);
    CHECK(budget.remaining() == 0);

    auto rng2 = derive_stream(3, 1);
    CHECK_THROWS_AS(validate_example(FixedPolicy{1}, oracle, ex, budget, rng2), BudgetError);
}

TEST_CASE("validate_example: chi policy stops with p <= threshold or cap/budget") {
    const UniformNoiseOracle oracle(10, 0.4);
    const ChiSquarePolicy chi{0.05, 0};
    for (std::uint64_t sid = 0; sid < 200; ++sid) {
        const Example ex{static_cast<std::int64_t>(sid), 3, {}};
        auto budget = ample();
        auto rng = derive_stream(4, sid);
        const auto out = validate_example(chi, oracle, ex, budget, rng);
        CHECK(out.queries_used >= 1);
        CHECK(out.reason == FinalizeReason::Policy);
        CHECK(stats::chi_square_p_value(out.tally) <= 0.05);
    }
}

TEST_CASE("validate_example: chi cap stops heavy-tail runs") {
    const UniformNoiseOracle oracle(10, 0.8);
    const ChiSquarePolicy capped{0.05, 5};
    int cap_hits = 0;
    for (std::uint64_t sid = 0; sid < 200; ++sid) {
        const Example ex{static_cast<std::int64_t>(sid), 0, {}};
        auto budget = ample();
        auto rng = derive_stream(5, sid);
        const auto out = validate_example(capped, oracle, ex, budget, rng);
        CHECK(out.queries_used <= 5);
        const bool policy_ok = stats::chi_square_p_value(out.tally) <= 0.05;
        const bool cap_ok = out.queries_used == 5;
        CHECK((policy_ok || cap_ok));
        if (out.reason == FinalizeReason::Cap) {
            ++cap_hits;
            CHECK(out.queries_used == 5);
            CHECK(stats::chi_square_p_value(out.tally) > 0.05);
        }
    }
    CHECK(cap_hits > 0);
}

TEST_CASE("peaked flag distinguishes a clear mode from a split one") {
    const Policy policy = FixedPolicy{10};
    // Drive validate_example indirectly: check unique-argmax semantics via
    // the outcome of hand-built tallies processed by the campaign CSV, or
    // directly on majority_vote input here.
    auto budget = ample();
    auto rng = derive_stream(6, 0);
    const UniformNoiseOracle clean(10, 0.0);
    const Example ex{0, 4, {}};
    const auto out = validate_example(policy, clean, ex, budget, rng);
    CHECK(out.peaked);
}

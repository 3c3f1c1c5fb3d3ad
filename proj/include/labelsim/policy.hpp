#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "labelsim/core.hpp"
#include "labelsim/oracle.hpp"
#include "labelsim/random.hpp"

namespace labelsim {

enum class PolicyDecision { Continue, Finalize };

// Why an example's validation ended.
enum class FinalizeReason { Policy, Budget, Cap };

std::string_view to_string(FinalizeReason r);

// Always validate exactly v times.
struct FixedPolicy {
    int v = 1;
};

// Validation count steps through `stages` as the budget is consumed: the
// k-th stage applies while consumed/s_max lies in [k*stage_fraction,
// (k+1)*stage_fraction); the last stage covers all remaining budget.
struct ScheduledPolicy {
    std::vector<int> stages;
    double stage_fraction = 0.10;
};

// Keep querying until the uniformity test rejects at `threshold`
// (Algorithm: start with p = 1, query, recompute p on the counts).
// cap = 0 means unlimited; otherwise stop after cap queries.
struct ChiSquarePolicy {
    double threshold = 0.05;
    std::int64_t cap = 0;
};

using Policy = std::variant<FixedPolicy, ScheduledPolicy, ChiSquarePolicy>;

// Throws std::invalid_argument if the policy's fields are out of range.
void check_policy(const Policy& policy);

// Stage value currently in force given budget consumption.
int current_stage_v(const ScheduledPolicy& schedule, const BudgetLedger& budget);

// Continue-or-finalize for one more oracle query. Finalizes unconditionally
// when the ledger is empty.
PolicyDecision decide(const Policy& policy, const VoteTally& tally, const BudgetLedger& budget);

struct ValidationOutcome {
    VoteTally tally;
    LabelId label = 0;
    std::int64_t queries_used = 0;
    FinalizeReason reason = FinalizeReason::Policy;
    bool peaked = false; // final tally has a unique argmax
};

// Queries the oracle while decide() says Continue, debiting one budget unit
// per query, then majority-votes the tally (tie-break from the same stream).
ValidationOutcome validate_example(const Policy& policy, const Oracle& oracle,
                                   const Example& example, BudgetLedger& budget,
                                   RandomStream& rng);

// Policy grammar: "fixed:v=5", "scheduled:stages=1,3,5,7;frac=0.1",
// "chi:threshold=0.05;cap=0".
Policy parse_policy(std::string_view text);
std::string format_policy(const Policy& policy);

} // namespace labelsim

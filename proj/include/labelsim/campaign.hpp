#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "labelsim/core.hpp"
#include "labelsim/oracle.hpp"
#include "labelsim/policy.hpp"

namespace labelsim {

struct LabeledExample {
    std::int64_t example_id = 0;
    LabelId assigned_label = 0;
    LabelId true_label = 0;
    std::int64_t queries_used = 0;
    VoteTally tally{1};
    bool correct = false;
    FinalizeReason reason = FinalizeReason::Policy;
    bool peaked = false;
};

struct CampaignResult {
    std::vector<LabeledExample> labeled;
    std::int64_t s_max = 0;
    std::int64_t total_queries = 0;
    double label_accuracy = 0.0;   // NaN when nothing was labeled
    double mean_validations = 0.0; // NaN when nothing was labeled
    double std_validations = 0.0;  // NaN when nothing was labeled
};

// Processes examples in stream order against one oracle/policy/budget.
// Example i draws from stream_id = example_id, so results do not depend on
// scheduling: any `threads` value produces byte-identical results.
CampaignResult run_campaign(const Oracle& oracle, const Policy& policy, std::int64_t s_max,
                            std::span<const Example> examples, std::uint64_t master_seed,
                            int threads = 1);

struct CampaignSummary {
    std::int64_t labeled = 0;
    std::int64_t total_queries = 0;
    std::int64_t s_max = 0;
    bool has_stats = false; // accuracy/mean/std meaningful (labeled > 0)
    double label_accuracy = 0.0;
    double mean_validations = 0.0;
    double std_validations = 0.0;
    std::int64_t finalized_policy = 0;
    std::int64_t finalized_budget = 0;
    std::int64_t finalized_cap = 0;
};

CampaignSummary summarize(const CampaignResult& result);

// Per-example CSV:
// example_id,assigned_label,true_label,queries_used,correct,finalize_reason,peaked
void write_campaign_csv(std::ostream& os, const CampaignResult& result);

// key=value lines; accuracy/mean/std lines are omitted for empty results.
void write_summary(std::ostream& os, const CampaignSummary& summary);

} // namespace labelsim

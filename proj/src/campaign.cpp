#include "labelsim/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "labelsim/format.hpp"
#include "labelsim/stats.hpp"

namespace labelsim {

namespace {

// Oracle draws for one example, computed without touching the shared
// ledger. The policy-side stopping point that does not depend on the
// budget is baked in (fixed v, the chi rule, or the largest stage); the
// sequential allocator below replays budget-dependent decisions against
// the cached labels, so parallel and serial runs agree bit for bit.
struct Trajectory {
    std::vector<LabelId> labels;
    std::vector<std::uint64_t> positions; // stream position after each draw
    FinalizeReason unconstrained_reason = FinalizeReason::Policy;
};

Trajectory compute_trajectory(const Policy& policy, const Oracle& oracle,
                              const Example& example, std::uint64_t master_seed) {
    Trajectory traj;
    RandomStream rng = derive_stream(master_seed, static_cast<std::uint64_t>(example.id));

    auto draw = [&] {
        traj.labels.push_back(oracle.query(example, rng));
        traj.positions.push_back(rng.position());
    };

    if (const auto* fixed = std::get_if<FixedPolicy>(&policy)) {
        for (int i = 0; i < fixed->v; ++i) draw();
    } else if (const auto* sched = std::get_if<ScheduledPolicy>(&policy)) {
        for (int i = 0; i < sched->stages.back(); ++i) draw();
    } else {
        const auto& chi = std::get<ChiSquarePolicy>(policy);
        VoteTally tally(oracle.classes());
        while (true) {
            draw();
            tally.add(traj.labels.back());
            if (stats::chi_square_p_value(tally) <= chi.threshold) {
                traj.unconstrained_reason = FinalizeReason::Policy;
                break;
            }
            if (chi.cap > 0 && tally.total() >= chi.cap) {
                traj.unconstrained_reason = FinalizeReason::Cap;
                break;
            }
        }
    }
    return traj;
}

// Replays the budget-dependent part of the decision loop. Returns false if
// the example got no query at all (budget was already empty).
bool allocate_example(const Policy& policy, const Oracle& oracle, const Example& example,
                      const Trajectory& traj, BudgetLedger& ledger, std::uint64_t master_seed,
                      LabeledExample& out) {
    VoteTally tally(oracle.classes());
    std::size_t k = 0;
    FinalizeReason reason = FinalizeReason::Policy;
    while (true) {
        bool policy_stop = false;
        if (const auto* fixed = std::get_if<FixedPolicy>(&policy)) {
            policy_stop = static_cast<std::int64_t>(k) >= fixed->v;
        } else if (const auto* sched = std::get_if<ScheduledPolicy>(&policy)) {
            policy_stop = static_cast<std::int64_t>(k) >= current_stage_v(*sched, ledger);
        } else {
            policy_stop = k >= traj.labels.size();
            if (policy_stop) reason = traj.unconstrained_reason;
        }
        if (policy_stop) {
            break;
        }
        if (ledger.remaining() == 0) {
            reason = FinalizeReason::Budget;
            break;
        }
        ledger.consume(1);
        tally.add(traj.labels[k]);
        ++k;
    }
    if (k == 0) {
        return false;
    }

    RandomStream rng = derive_stream(master_seed, static_cast<std::uint64_t>(example.id));
    rng.set_position(traj.positions[k - 1]);

    out.example_id = example.id;
    out.true_label = example.true_label;
    out.queries_used = static_cast<std::int64_t>(k);
    out.assigned_label = stats::majority_vote(tally, rng);
    out.correct = out.assigned_label == example.true_label;
    out.reason = reason;
    {
        std::int64_t best = -1;
        int mult = 0;
        for (int c = 0; c < tally.classes(); ++c) {
            if (tally[c] > best) {
                best = tally[c];
                mult = 1;
            } else if (tally[c] == best) {
                ++mult;
            }
        }
        out.peaked = mult == 1;
    }
    out.tally = std::move(tally);
    return true;
}

} // namespace

CampaignResult run_campaign(const Oracle& oracle, const Policy& policy, std::int64_t s_max,
                            std::span<const Example> examples, std::uint64_t master_seed,
                            int threads) {
    check_policy(policy);
    if (s_max < 1) {
        throw std::invalid_argument("run_campaign: s_max must be >= 1");
    }
    if (examples.empty()) {
        throw std::invalid_argument("run_campaign: example stream is empty");
    }
    if (threads < 1) {
        throw std::invalid_argument("run_campaign: threads must be >= 1");
    }

    BudgetLedger ledger(s_max);
    CampaignResult result;
    result.s_max = s_max;

    constexpr std::size_t kBlock = 1024;
    std::vector<Trajectory> trajectories;
    bool out_of_budget = false;

    for (std::size_t lo = 0; lo < examples.size() && !out_of_budget; lo += kBlock) {
        const std::size_t hi = std::min(lo + kBlock, examples.size());
        const std::size_t n = hi - lo;
        trajectories.assign(n, Trajectory{});

        const auto nworkers =
            std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        if (nworkers <= 1) {
            for (std::size_t i = 0; i < n; ++i) {
                trajectories[i] = compute_trajectory(policy, oracle, examples[lo + i], master_seed);
            }
        } else {
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> errors(nworkers);
            workers.reserve(nworkers);
            for (std::size_t t = 0; t < nworkers; ++t) {
                workers.emplace_back([&, t] {
                    try {
                        for (std::size_t i = t; i < n; i += nworkers) {
                            trajectories[i] =
                                compute_trajectory(policy, oracle, examples[lo + i], master_seed);
                        }
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& err : errors) {
                if (err) std::rethrow_exception(err);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (ledger.remaining() == 0) {
                out_of_budget = true;
                break;
            }
            LabeledExample rec;
            if (!allocate_example(policy, oracle, examples[lo + i], trajectories[i], ledger,
                                  master_seed, rec)) {
                out_of_budget = true;
                break;
            }
            result.labeled.push_back(std::move(rec));
        }
    }

    result.total_queries = ledger.consumed();
    if (result.labeled.empty()) {
        result.label_accuracy = std::numeric_limits<double>::quiet_NaN();
        result.mean_validations = std::numeric_limits<double>::quiet_NaN();
        result.std_validations = std::numeric_limits<double>::quiet_NaN();
    } else {
        std::int64_t correct = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& r : result.labeled) {
            correct += r.correct ? 1 : 0;
            sum += static_cast<double>(r.queries_used);
            sum_sq += static_cast<double>(r.queries_used) * static_cast<double>(r.queries_used);
        }
        const auto count = static_cast<double>(result.labeled.size());
        result.label_accuracy = static_cast<double>(correct) / count;
        result.mean_validations = sum / count;
        const double var = sum_sq / count - result.mean_validations * result.mean_validations;
        result.std_validations = std::sqrt(var > 0.0 ? var : 0.0);
    }
    return result;
}

CampaignSummary summarize(const CampaignResult& result) {
    CampaignSummary s;
    s.labeled = static_cast<std::int64_t>(result.labeled.size());
    s.total_queries = result.total_queries;
    s.s_max = result.s_max;
    s.has_stats = !result.labeled.empty();
    if (s.has_stats) {
        s.label_accuracy = result.label_accuracy;
        s.mean_validations = result.mean_validations;
        s.std_validations = result.std_validations;
    }
    for (const auto& r : result.labeled) {
        switch (r.reason) {
            case FinalizeReason::Policy: ++s.finalized_policy; break;
            case FinalizeReason::Budget: ++s.finalized_budget; break;
            case FinalizeReason::Cap: ++s.finalized_cap; break;
        }
    }
    return s;
}

void write_campaign_csv(std::ostream& os, const CampaignResult& result) {
    os << "example_id,assigned_label,true_label,queries_used,correct,finalize_reason,peaked\n";
    for (const auto& r : result.labeled) {
        os << r.example_id << ',' << r.assigned_label << ',' << r.true_label << ','
           << r.queries_used << ',' << (r.correct ? 1 : 0) << ',' << to_string(r.reason) << ','
           << (r.peaked ? 1 : 0) << '\n';
    }
}

void write_summary(std::ostream& os, const CampaignSummary& summary) {
    os << "labeled=" << summary.labeled << '\n';
    os << "total_queries=" << summary.total_queries << '\n';
    os << "s_max=" << summary.s_max << '\n';
    if (summary.has_stats) {
        os << "label_accuracy=" << format_double(summary.label_accuracy) << '\n';
        os << "mean_validations=" << format_double(summary.mean_validations) << '\n';
        os << "std_validations=" << format_double(summary.std_validations) << '\n';
    }
    os << "finalized_policy=" << summary.finalized_policy << '\n';
    os << "finalized_budget=" << summary.finalized_budget << '\n';
    os << "finalized_cap=" << summary.finalized_cap << '\n';
}

} // namespace labelsim

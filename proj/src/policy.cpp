#include "labelsim/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "labelsim/stats.hpp"

namespace labelsim {

namespace {

// Tolerance for stage-boundary comparison: consumed/s_max and k*frac are
// both inexact; without it, fractions like 0.3/0.1 land one stage early.
constexpr double kStageEps = 1e-12;

bool unique_argmax(const VoteTally& tally) {
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
    return mult == 1;
}

[[noreturn]] void parse_fail(std::string_view text, const std::string& why) {
    throw std::invalid_argument("bad policy '" + std::string(text) + "': " + why);
}

std::int64_t parse_int(std::string_view text, std::string_view field, std::string_view whole) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        parse_fail(whole, "invalid integer for " + std::string(field));
    }
    return value;
}

double parse_real(std::string_view text, std::string_view field, std::string_view whole) {
    // from_chars<double> is missing in some libstdc++ versions; strtod via string.
    const std::string s(text);
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) {
        parse_fail(whole, "invalid number for " + std::string(field));
    }
    return value;
}

// key=value;key=value body split
std::vector<std::pair<std::string_view, std::string_view>> split_fields(std::string_view body,
                                                                        std::string_view whole) {
    std::vector<std::pair<std::string_view, std::string_view>> fields;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto semi = body.find(';', pos);
        if (semi == std::string_view::npos) semi = body.size();
        const std::string_view item = body.substr(pos, semi - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            parse_fail(whole, "expected key=value, got '" + std::string(item) + "'");
        }
        fields.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        pos = semi + 1;
    }
    return fields;
}

} // namespace

std::string_view to_string(FinalizeReason r) {
    switch (r) {
        case FinalizeReason::Policy: return "policy";
        case FinalizeReason::Budget: return "budget";
        case FinalizeReason::Cap: return "cap";
    }
    return "?";
}

void check_policy(const Policy& policy) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedPolicy>) {
                if (p.v < 1) throw std::invalid_argument("FixedPolicy: v must be >= 1");
            } else if constexpr (std::is_same_v<T, ScheduledPolicy>) {
                if (p.stages.empty()) {
                    throw std::invalid_argument("ScheduledPolicy: stages must be non-empty");
                }
                for (std::size_t i = 0; i < p.stages.size(); ++i) {
                    if (p.stages[i] < 1) {
                        throw std::invalid_argument("ScheduledPolicy: stages must be positive");
                    }
                    if (i && p.stages[i] <= p.stages[i - 1]) {
                        throw std::invalid_argument(
                            "ScheduledPolicy: stages must be strictly increasing");
                    }
                }
                if (!(p.stage_fraction > 0.0) || p.stage_fraction > 1.0) {
                    throw std::invalid_argument("ScheduledPolicy: stage_fraction must be in (0,1]");
                }
            } else {
                if (!(p.threshold > 0.0) || !(p.threshold < 1.0)) {
                    throw std::invalid_argument("ChiSquarePolicy: threshold must be in (0,1)");
                }
                if (p.cap < 0) {
                    throw std::invalid_argument("ChiSquarePolicy: cap must be >= 0");
                }
            }
        },
        policy);
}

int current_stage_v(const ScheduledPolicy& schedule, const BudgetLedger& budget) {
    check_policy(Policy(schedule));
    if (budget.s_max() <= 0) {
        throw std::invalid_argument("current_stage_v: budget s_max must be positive");
    }
    const double f = budget.consumed_fraction();
    const auto k = static_cast<int>(schedule.stages.size());
    int idx = static_cast<int>(std::floor(f / schedule.stage_fraction + kStageEps));
    if (idx > k - 1) idx = k - 1;
    if (idx < 0) idx = 0;
    return schedule.stages[static_cast<std::size_t>(idx)];
}

PolicyDecision decide(const Policy& policy, const VoteTally& tally, const BudgetLedger& budget) {
    check_policy(policy);
    if (budget.remaining() == 0) {
        return PolicyDecision::Finalize;
    }
    return std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedPolicy>) {
                return tally.total() < p.v ? PolicyDecision::Continue : PolicyDecision::Finalize;
            } else if constexpr (std::is_same_v<T, ScheduledPolicy>) {
                return tally.total() < current_stage_v(p, budget) ? PolicyDecision::Continue
                                                                  : PolicyDecision::Finalize;
            } else {
                if (tally.total() == 0) return PolicyDecision::Continue;
                if (p.cap > 0 && tally.total() >= p.cap) return PolicyDecision::Finalize;
                return stats::chi_square_p_value(tally) > p.threshold ? PolicyDecision::Continue
                                                                      : PolicyDecision::Finalize;
            }
        },
        policy);
}

ValidationOutcome validate_example(const Policy& policy, const Oracle& oracle,
                                   const Example& example, BudgetLedger& budget,
                                   RandomStream& rng) {
    check_policy(policy);
    if (budget.remaining() < 1) {
        throw BudgetError("validate_example: no budget before the first query");
    }
    VoteTally tally(oracle.classes());
    while (decide(policy, tally, budget) == PolicyDecision::Continue) {
        const LabelId label = oracle.query(example, rng);
        budget.consume(1);
        tally.add(label);
    }

    ValidationOutcome out{std::move(tally)};
    out.queries_used = out.tally.total();

    // Classify the stop: the policy's own condition wins over a
    // simultaneous budget/cap boundary.
    out.reason = std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FixedPolicy>) {
                return out.queries_used >= p.v ? FinalizeReason::Policy : FinalizeReason::Budget;
            } else if constexpr (std::is_same_v<T, ScheduledPolicy>) {
                return out.queries_used >= current_stage_v(p, budget) ? FinalizeReason::Policy
                                                                      : FinalizeReason::Budget;
            } else {
                if (stats::chi_square_p_value(out.tally) <= p.threshold) {
                    return FinalizeReason::Policy;
                }
                if (p.cap > 0 && out.queries_used >= p.cap) {
                    return FinalizeReason::Cap;
                }
                return FinalizeReason::Budget;
            }
        },
        policy);

    out.label = stats::majority_vote(out.tally, rng);
    out.peaked = unique_argmax(out.tally);
    return out;
}

Policy parse_policy(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view kind = colon == std::string_view::npos ? text : text.substr(0, colon);
    const std::string_view body = colon == std::string_view::npos ? std::string_view{}
                                                                  : text.substr(colon + 1);
    Policy policy;
    if (kind == "fixed") {
        FixedPolicy p;
        bool have_v = false;
        for (const auto& [key, value] : split_fields(body, text)) {
            if (key == "v") {
                p.v = static_cast<int>(parse_int(value, "v", text));
                have_v = true;
            } else {
                parse_fail(text, "unknown field '" + std::string(key) + "'");
            }
        }
        if (!have_v) parse_fail(text, "fixed policy needs v=<int>");
        policy = p;
    } else if (kind == "scheduled") {
        ScheduledPolicy p;
        bool have_stages = false;
        for (const auto& [key, value] : split_fields(body, text)) {
            if (key == "stages") {
                std::size_t pos = 0;
                while (pos <= value.size()) {
                    auto comma = value.find(',', pos);
                    if (comma == std::string_view::npos) comma = value.size();
                    p.stages.push_back(static_cast<int>(
                        parse_int(value.substr(pos, comma - pos), "stages", text)));
                    pos = comma + 1;
                }
                have_stages = true;
            } else if (key == "frac") {
                p.stage_fraction = parse_real(value, "frac", text);
            } else {
                parse_fail(text, "unknown field '" + std::string(key) + "'");
            }
        }
        if (!have_stages) parse_fail(text, "scheduled policy needs stages=<list>");
        policy = p;
    } else if (kind == "chi") {
        ChiSquarePolicy p;
        for (const auto& [key, value] : split_fields(body, text)) {
            if (key == "threshold") {
                p.threshold = parse_real(value, "threshold", text);
            } else if (key == "cap") {
                p.cap = parse_int(value, "cap", text);
            } else {
                parse_fail(text, "unknown field '" + std::string(key) + "'");
            }
        }
        policy = p;
    } else {
        parse_fail(text, "unknown policy kind '" + std::string(kind) + "'");
    }
    try {
        check_policy(policy);
    } catch (const std::invalid_argument& e) {
        parse_fail(text, e.what());
    }
    return policy;
}

std::string format_policy(const Policy& policy) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            char buf[64];
            if constexpr (std::is_same_v<T, FixedPolicy>) {
                return "fixed:v=" + std::to_string(p.v);
            } else if constexpr (std::is_same_v<T, ScheduledPolicy>) {
                std::string out = "scheduled:stages=";
                for (std::size_t i = 0; i < p.stages.size(); ++i) {
                    if (i) out += ',';
                    out += std::to_string(p.stages[i]);
                }
                std::snprintf(buf, sizeof buf, ";frac=%.10g", p.stage_fraction);
                return out + buf;
            } else {
                std::snprintf(buf, sizeof buf, "chi:threshold=%.10g;cap=%lld", p.threshold,
                              static_cast<long long>(p.cap));
                return std::string(buf);
            }
        },
        policy);
}

} // namespace labelsim

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "labelsim/oracle.hpp"
#include "labelsim/random.hpp"

namespace labelsim::poker {

// rank 2..14 (ace high), suit 0..3 = spades, hearts, diamonds, clubs.
struct Card {
    std::int8_t rank = 0;
    std::int8_t suit = 0;

    auto operator<=>(const Card&) const = default;
    int deck_index() const { return (rank - 2) * 4 + suit; }
};

Card parse_card(std::string_view text);
std::string format_card(Card c);

// Space-separated card list, e.g. "Qh Js".
std::vector<Card> parse_cards(std::string_view text);
std::string format_cards(std::span<const Card> cards);

enum class HandCategory : int {
    HighCard = 0,
    Pair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
};

// Total order over 5-card hand strengths: category first, then the
// category's rank vector. Packed into one integer so comparisons are flat.
struct HandRank {
    HandCategory category = HandCategory::HighCard;
    std::array<std::int8_t, 5> tiebreak{}; // significant ranks, high to low; 0-padded
    std::uint32_t key = 0;

    auto operator<=>(const HandRank& o) const { return key <=> o.key; }
    bool operator==(const HandRank& o) const { return key == o.key; }
};

HandRank evaluate5(const std::array<Card, 5>& cards);

// Best 5-card hand out of 7 (maximum over all 21 subsets).
HandRank evaluate7(const std::array<Card, 7>& cards);

enum class ShowdownOutcome { P1Wins, P2Wins, Tie };

// Exact river-enumeration equity conditioned on a flop: counts over the
// C(45,2) = 990 two-card completions. Shares split ties half-and-half.
struct Equity {
    std::int64_t win1_count = 0;
    std::int64_t win2_count = 0;
    std::int64_t tie_count = 0;
    std::int64_t rivers = 0;

    double win1() const { return static_cast<double>(win1_count) / static_cast<double>(rivers); }
    double win2() const { return static_cast<double>(win2_count) / static_cast<double>(rivers); }
    double tie() const { return static_cast<double>(tie_count) / static_cast<double>(rivers); }
    double p1_share() const {
        return (static_cast<double>(win1_count) + 0.5 * static_cast<double>(tie_count)) /
               static_cast<double>(rivers);
    }
    double p2_share() const {
        return (static_cast<double>(win2_count) + 0.5 * static_cast<double>(tie_count)) /
               static_cast<double>(rivers);
    }
};

using HoleCards = std::array<Card, 2>;
using Flop = std::array<Card, 3>;

Equity exact_showdown_equity(const HoleCards& p1, const HoleCards& p2, const Flop& flop);

// The 45 cards not among the 7 known ones, in deck order.
std::vector<Card> remaining_deck(const HoleCards& p1, const HoleCards& p2, const Flop& flop);

// Uniformly random unordered pair from the remaining deck.
std::pair<Card, Card> sample_river(const std::vector<Card>& remaining, RandomStream& rng);

ShowdownOutcome showdown(const HoleCards& p1, const HoleCards& p2, const Flop& flop,
                         Card river1, Card river2);

ShowdownOutcome sample_showdown(const HoleCards& p1, const HoleCards& p2, const Flop& flop,
                                RandomStream& rng);

// Binary oracle over a fixed matchup: one query samples a river and labels
// which hand won (ties flip a fair coin). Label 0 = P1 better, 1 = P2
// better; the correct label is the equity argmax. Rejects matchups whose
// tie-adjusted equity is exactly one half.
class PokerShowdownOracle : public Oracle {
public:
    PokerShowdownOracle(const HoleCards& p1, const HoleCards& p2, const Flop& flop);

    int classes() const override { return 2; }
    LabelId query(const Example& example, RandomStream& rng) const override;

    const Equity& equity() const { return equity_; }
    LabelId correct_label() const { return correct_; }
    // Per-query probability of the correct label (tie-adjusted share).
    double q() const { return correct_ == 0 ? equity_.p1_share() : equity_.p2_share(); }
    ProbabilityVector implied_distribution() const;

private:
    HoleCards p1_;
    HoleCards p2_;
    Flop flop_;
    std::vector<Card> remaining_;
    Equity equity_;
    LabelId correct_;
};

} // namespace labelsim::poker

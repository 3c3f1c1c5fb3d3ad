#include "labelsim/poker.hpp"

#include <algorithm>
#include <stdexcept>

namespace labelsim::poker {

namespace {

constexpr std::string_view kRankChars = "23456789TJQKA";
constexpr std::string_view kSuitChars = "shdc";

void check_distinct(std::span<const Card> cards) {
    std::uint64_t seen = 0;
    for (const Card& c : cards) {
        if (c.rank < 2 || c.rank > 14 || c.suit < 0 || c.suit > 3) {
            throw std::invalid_argument("invalid card");
        }
        const std::uint64_t bit = 1ULL << c.deck_index();
        if (seen & bit) {
            throw std::invalid_argument("duplicate card " + format_card(c));
        }
        seen |= bit;
    }
}

std::uint32_t pack_key(HandCategory cat, const std::array<std::int8_t, 5>& tb) {
    std::uint32_t key = static_cast<std::uint32_t>(cat) << 20;
    for (int i = 0; i < 5; ++i) {
        key |= static_cast<std::uint32_t>(tb[static_cast<std::size_t>(i)]) << (16 - 4 * i);
    }
    return key;
}

HandRank make_rank(HandCategory cat, std::array<std::int8_t, 5> tb) {
    HandRank r;
    r.category = cat;
    r.tiebreak = tb;
    r.key = pack_key(cat, tb);
    return r;
}

} // namespace

Card parse_card(std::string_view text) {
    if (text.size() != 2) {
        throw std::invalid_argument("card must be 2 characters, got '" + std::string(text) + "'");
    }
    const auto r = kRankChars.find(text[0]);
    const auto s = kSuitChars.find(text[1]);
    if (r == std::string_view::npos || s == std::string_view::npos) {
        throw std::invalid_argument("malformed card '" + std::string(text) + "'");
    }
    return Card{static_cast<std::int8_t>(r + 2), static_cast<std::int8_t>(s)};
}

std::string format_card(Card c) {
    if (c.rank < 2 || c.rank > 14 || c.suit < 0 || c.suit > 3) {
        throw std::invalid_argument("invalid card");
    }
    std::string out(2, ' ');
    out[0] = kRankChars[static_cast<std::size_t>(c.rank - 2)];
    out[1] = kSuitChars[static_cast<std::size_t>(c.suit)];
    return out;
}

std::vector<Card> parse_cards(std::string_view text) {
    std::vector<Card> cards;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == ' ') {
            ++i;
            continue;
        }
        if (i + 2 > text.size()) {
            throw std::invalid_argument("trailing garbage in card list '" + std::string(text) + "'");
        }
        cards.push_back(parse_card(text.substr(i, 2)));
        i += 2;
        if (i < text.size() && text[i] != ' ') {
            throw std::invalid_argument("cards must be space-separated in '" + std::string(text) + "'");
        }
    }
    return cards;
}

std::string format_cards(std::span<const Card> cards) {
    std::string out;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        if (i) out += ' ';
        out += format_card(cards[i]);
    }
    return out;
}

HandRank evaluate5(const std::array<Card, 5>& cards) {
    check_distinct(cards);

    int rank_count[15] = {0};
    int suit_count[4] = {0};
    for (const Card& c : cards) {
        ++rank_count[c.rank];
        ++suit_count[c.suit];
    }
    const bool flush = std::any_of(std::begin(suit_count), std::end(suit_count),
                                   [](int n) { return n == 5; });

    // Straight: five distinct ranks spanning 4, or the wheel (A-5).
    std::int8_t straight_high = 0;
    {
        std::uint16_t mask = 0;
        for (int r = 2; r <= 14; ++r) {
            if (rank_count[r]) mask |= static_cast<std::uint16_t>(1u << r);
        }
        for (int hi = 14; hi >= 6; --hi) {
            const std::uint16_t run = static_cast<std::uint16_t>(0b11111u << (hi - 4));
            if ((mask & run) == run) {
                straight_high = static_cast<std::int8_t>(hi);
                break;
            }
        }
        constexpr std::uint16_t kWheel = (1u << 14) | (1u << 5) | (1u << 4) | (1u << 3) | (1u << 2);
        if (!straight_high && (mask & kWheel) == kWheel) {
            straight_high = 5;
        }
    }

    // Ranks ordered by (count, rank) descending drive every tiebreak.
    std::array<std::int8_t, 5> ordered{};
    {
        int pos = 0;
        for (int count = 4; count >= 1; --count) {
            for (int r = 14; r >= 2; --r) {
                if (rank_count[r] == count) {
                    for (int i = 0; i < count; ++i) {
                        ordered[static_cast<std::size_t>(pos++)] = static_cast<std::int8_t>(r);
                    }
                }
            }
        }
    }

    std::array<int, 5> shape{};
    {
        int pos = 0;
        for (int count = 4; count >= 1; --count) {
            for (int r = 14; r >= 2; --r) {
                if (rank_count[r] == count) shape[static_cast<std::size_t>(pos++)] = count;
            }
        }
    }

    if (flush && straight_high) {
        return make_rank(HandCategory::StraightFlush, {straight_high, 0, 0, 0, 0});
    }
    if (shape[0] == 4) {
        return make_rank(HandCategory::Quads, {ordered[0], ordered[4], 0, 0, 0});
    }
    if (shape[0] == 3 && shape[1] == 2) {
        return make_rank(HandCategory::FullHouse, {ordered[0], ordered[3], 0, 0, 0});
    }
    if (flush) {
        return make_rank(HandCategory::Flush, ordered);
    }
    if (straight_high) {
        return make_rank(HandCategory::Straight, {straight_high, 0, 0, 0, 0});
    }
    if (shape[0] == 3) {
        return make_rank(HandCategory::Trips, {ordered[0], ordered[3], ordered[4], 0, 0});
    }
    if (shape[0] == 2 && shape[1] == 2) {
        return make_rank(HandCategory::TwoPair, {ordered[0], ordered[2], ordered[4], 0, 0});
    }
    if (shape[0] == 2) {
        return make_rank(HandCategory::Pair, {ordered[0], ordered[2], ordered[3], ordered[4], 0});
    }
    return make_rank(HandCategory::HighCard, ordered);
}

HandRank evaluate7(const std::array<Card, 7>& cards) {
    check_distinct(cards);
    // All 21 ways to drop 2 of 7.
    HandRank best{};
    best.key = 0;
    std::array<Card, 5> hand;
    for (int a = 0; a < 7; ++a) {
        for (int b = a + 1; b < 7; ++b) {
            int pos = 0;
            for (int i = 0; i < 7; ++i) {
                if (i != a && i != b) {
                    hand[static_cast<std::size_t>(pos++)] = cards[static_cast<std::size_t>(i)];
                }
            }
            HandRank r = evaluate5(hand);
            if (r.key > best.key) {
                best = r;
            }
        }
    }
    return best;
}

std::vector<Card> remaining_deck(const HoleCards& p1, const HoleCards& p2, const Flop& flop) {
    std::array<Card, 7> known = {p1[0], p1[1], p2[0], p2[1], flop[0], flop[1], flop[2]};
    check_distinct(known);
    std::uint64_t used = 0;
    for (const Card& c : known) {
        used |= 1ULL << c.deck_index();
    }
    std::vector<Card> deck;
    deck.reserve(45);
    for (std::int8_t r = 2; r <= 14; ++r) {
        for (std::int8_t s = 0; s < 4; ++s) {
            Card c{r, s};
            if (!(used & (1ULL << c.deck_index()))) {
                deck.push_back(c);
            }
        }
    }
    return deck;
}

ShowdownOutcome showdown(const HoleCards& p1, const HoleCards& p2, const Flop& flop,
                         Card river1, Card river2) {
    const std::array<Card, 7> h1 = {p1[0], p1[1], flop[0], flop[1], flop[2], river1, river2};
    const std::array<Card, 7> h2 = {p2[0], p2[1], flop[0], flop[1], flop[2], river1, river2};
    const HandRank r1 = evaluate7(h1);
    const HandRank r2 = evaluate7(h2);
    if (r1.key > r2.key) return ShowdownOutcome::P1Wins;
    if (r2.key > r1.key) return ShowdownOutcome::P2Wins;
    return ShowdownOutcome::Tie;
}

Equity exact_showdown_equity(const HoleCards& p1, const HoleCards& p2, const Flop& flop) {
    const std::vector<Card> deck = remaining_deck(p1, p2, flop);
    Equity eq;
    for (std::size_t i = 0; i < deck.size(); ++i) {
        for (std::size_t j = i + 1; j < deck.size(); ++j) {
            switch (showdown(p1, p2, flop, deck[i], deck[j])) {
                case ShowdownOutcome::P1Wins: ++eq.win1_count; break;
                case ShowdownOutcome::P2Wins: ++eq.win2_count; break;
                case ShowdownOutcome::Tie: ++eq.tie_count; break;
            }
            ++eq.rivers;
        }
    }
    return eq;
}

std::pair<Card, Card> sample_river(const std::vector<Card>& remaining, RandomStream& rng) {
    if (remaining.size() < 2) {
        throw std::invalid_argument("sample_river: fewer than 2 cards remain");
    }
    const auto n = static_cast<std::uint64_t>(remaining.size());
    const auto i = rng.next_below(n);
    auto j = rng.next_below(n - 1);
    if (j >= i) ++j;
    return {remaining[static_cast<std::size_t>(i)], remaining[static_cast<std::size_t>(j)]};
}

ShowdownOutcome sample_showdown(const HoleCards& p1, const HoleCards& p2, const Flop& flop,
                                RandomStream& rng) {
    const std::vector<Card> deck = remaining_deck(p1, p2, flop);
    const auto [r1, r2] = sample_river(deck, rng);
    return showdown(p1, p2, flop, r1, r2);
}

PokerShowdownOracle::PokerShowdownOracle(const HoleCards& p1, const HoleCards& p2,
                                         const Flop& flop)
    : p1_(p1), p2_(p2), flop_(flop), remaining_(remaining_deck(p1, p2, flop)),
      equity_(exact_showdown_equity(p1, p2, flop)) {
    if (equity_.win1_count == equity_.win2_count) {
        throw std::invalid_argument(
            "PokerShowdownOracle: matchup is exactly balanced; no label is strictly "
            "most probable");
    }
    correct_ = equity_.win1_count > equity_.win2_count ? 0 : 1;
}

LabelId PokerShowdownOracle::query(const Example& example, RandomStream& rng) const {
    if (example.true_label < 0 || example.true_label >= 2) {
        throw std::invalid_argument("PokerShowdownOracle: example label out of range");
    }
    const auto [r1, r2] = sample_river(remaining_, rng);
    switch (showdown(p1_, p2_, flop_, r1, r2)) {
        case ShowdownOutcome::P1Wins: return 0;
        case ShowdownOutcome::P2Wins: return 1;
        case ShowdownOutcome::Tie: return static_cast<LabelId>(rng.next_below(2));
    }
    return 0; // unreachable
}

ProbabilityVector PokerShowdownOracle::implied_distribution() const {
    const double share1 = equity_.p1_share();
    return ProbabilityVector({share1, 1.0 - share1}, correct_);
}

} // namespace labelsim::poker

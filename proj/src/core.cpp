#include "labelsim/core.hpp"

#include <cmath>

namespace labelsim {

ProbabilityVector::ProbabilityVector(std::vector<double> probs, int correct_index)
    : probs_(std::move(probs)), correct_(correct_index) {
    const int l = static_cast<int>(probs_.size());
    if (l < 2) {
        throw std::invalid_argument("ProbabilityVector: need at least 2 classes");
    }
    if (correct_ < 0 || correct_ >= l) {
        throw std::invalid_argument("ProbabilityVector: correct_index out of range");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("ProbabilityVector: negative entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("ProbabilityVector: entries sum to " + std::to_string(sum));
    }
    const double pj = probs_[static_cast<std::size_t>(correct_)];
    for (int k = 0; k < l; ++k) {
        if (k != correct_ && !(pj > probs_[static_cast<std::size_t>(k)])) {
            throw std::invalid_argument(
                "ProbabilityVector: correct label must be strictly most probable");
        }
    }
}

ProbabilityVector make_uniform_noise_vector(int classes, double noise, int correct_index) {
    if (classes < 2) {
        throw std::invalid_argument("make_uniform_noise_vector: need at least 2 classes");
    }
    const double upper = static_cast<double>(classes - 1) / static_cast<double>(classes);
    if (!(noise >= 0.0) || noise >= upper) {
        throw std::invalid_argument(
            "make_uniform_noise_vector: noise must lie in [0, (l-1)/l), got " +
            std::to_string(noise));
    }
    std::vector<double> p(static_cast<std::size_t>(classes),
                          noise / static_cast<double>(classes - 1));
    p[static_cast<std::size_t>(correct_index)] = 1.0 - noise;
    return ProbabilityVector(std::move(p), correct_index);
}

VoteTally::VoteTally(int classes) {
    if (classes < 1) {
        throw std::invalid_argument("VoteTally: need at least 1 class");
    }
    counts_.assign(static_cast<std::size_t>(classes), 0);
}

VoteTally::VoteTally(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) {
        throw std::invalid_argument("VoteTally: empty counts");
    }
    for (std::int64_t c : counts_) {
        if (c < 0) {
            throw std::invalid_argument("VoteTally: negative count");
        }
        total_ += c;
    }
}

void VoteTally::add(LabelId label, std::int64_t n) {
    if (label < 0 || label >= classes()) {
        throw std::invalid_argument("VoteTally: label out of range");
    }
    if (n < 0) {
        throw std::invalid_argument("VoteTally: negative increment");
    }
    counts_[static_cast<std::size_t>(label)] += n;
    total_ += n;
}

BudgetLedger::BudgetLedger(std::int64_t s_max) : s_max_(s_max) {
    if (s_max < 0) {
        throw std::invalid_argument("BudgetLedger: negative budget");
    }
}

void BudgetLedger::consume(std::int64_t n) {
    if (n < 0) {
        throw std::invalid_argument("BudgetLedger: negative consume");
    }
    if (consumed_ + n > s_max_) {
        throw BudgetError("budget exhausted: " + std::to_string(consumed_) + " + " +
                          std::to_string(n) + " > " + std::to_string(s_max_));
    }
    consumed_ += n;
}

} // namespace labelsim

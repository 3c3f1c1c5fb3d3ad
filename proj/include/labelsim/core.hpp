#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace labelsim {

using LabelId = std::int32_t;

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One item of the stream to be labeled. The payload is opaque to the
// labeling machinery (the MNIST pipeline keeps pixel bytes elsewhere).
struct Example {
    std::int64_t id = 0;
    LabelId true_label = 0;
    std::vector<std::uint8_t> payload;
};

// Distribution over l labels with a designated correct index that must be
// strictly most probable. Vectors with a tied maximum are rejected: the
// whole validation setting assumes a unique most-likely label.
class ProbabilityVector {
public:
    ProbabilityVector(std::vector<double> probs, int correct_index);

    int classes() const { return static_cast<int>(probs_.size()); }
    int correct_index() const { return correct_; }
    double q() const { return probs_[static_cast<std::size_t>(correct_)]; }
    double w() const { return 1.0 - q(); }
    double operator[](int k) const { return probs_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
    int correct_;
};

// probs[j] = 1-w, probs[k] = w/(l-1) otherwise. Requires w < (l-1)/l so
// that the correct label stays strictly most probable.
ProbabilityVector make_uniform_noise_vector(int classes, double noise, int correct_index);

// Per-label observation counts for one example.
class VoteTally {
public:
    explicit VoteTally(int classes);
    explicit VoteTally(std::vector<std::int64_t> counts);

    int classes() const { return static_cast<int>(counts_.size()); }
    std::int64_t total() const { return total_; }
    std::int64_t operator[](int k) const { return counts_[static_cast<std::size_t>(k)]; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

    void add(LabelId label, std::int64_t n = 1);

private:
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

// Global query budget. Consumption is checked, never saturating: a consume
// that would overrun throws BudgetError and leaves the ledger unchanged.
class BudgetLedger {
public:
    explicit BudgetLedger(std::int64_t s_max);

    std::int64_t s_max() const { return s_max_; }
    std::int64_t consumed() const { return consumed_; }
    std::int64_t remaining() const { return s_max_ - consumed_; }
    double consumed_fraction() const {
        return s_max_ > 0 ? static_cast<double>(consumed_) / static_cast<double>(s_max_) : 0.0;
    }

    void consume(std::int64_t n = 1);

private:
    std::int64_t s_max_;
    std::int64_t consumed_ = 0;
};

} // namespace labelsim

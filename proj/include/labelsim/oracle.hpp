#pragma once

#include <cstdint>

#include "labelsim/core.hpp"
#include "labelsim/random.hpp"

namespace labelsim {

// Stochastic label source. Queries are independent and identically
// distributed per example; all randomness comes from the caller's stream.
class Oracle {
public:
    virtual ~Oracle() = default;

    virtual int classes() const = 0;
    virtual LabelId query(const Example& example, RandomStream& rng) const = 0;

    // n sequential queries on the same stream, accumulated into a tally.
    VoteTally query_n(const Example& example, std::int64_t n, RandomStream& rng) const;
};

// Returns the example's true label with probability 1-w, any specific other
// label with probability w/(l-1).
class UniformNoiseOracle : public Oracle {
public:
    UniformNoiseOracle(int classes, double noise);

    int classes() const override { return classes_; }
    double noise() const { return noise_; }
    LabelId query(const Example& example, RandomStream& rng) const override;

private:
    int classes_;
    double noise_;
};

// Samples labels from a fixed probability vector, ignoring the example's
// identity; the example's true label is expected to be the vector's
// correct index. Models domains where noise is not uniform.
class VectorOracle : public Oracle {
public:
    explicit VectorOracle(ProbabilityVector p);

    int classes() const override { return p_.classes(); }
    const ProbabilityVector& distribution() const { return p_; }
    LabelId query(const Example& example, RandomStream& rng) const override;

private:
    ProbabilityVector p_;
};

} // namespace labelsim

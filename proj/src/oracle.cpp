#include "labelsim/oracle.hpp"

namespace labelsim {

VoteTally Oracle::query_n(const Example& example, std::int64_t n, RandomStream& rng) const {
    if (n < 1) {
        throw std::invalid_argument("query_n: need at least 1 query");
    }
    VoteTally tally(classes());
    for (std::int64_t i = 0; i < n; ++i) {
        tally.add(query(example, rng));
    }
    return tally;
}

UniformNoiseOracle::UniformNoiseOracle(int classes, double noise)
    : classes_(classes), noise_(noise) {
    if (classes < 2) {
        throw std::invalid_argument("UniformNoiseOracle: need at least 2 classes");
    }
    // w = (l-1)/l (every label equally likely) is the admissible extreme.
    const double upper = static_cast<double>(classes - 1) / static_cast<double>(classes);
    if (!(noise >= 0.0) || noise > upper) {
        throw std::invalid_argument("UniformNoiseOracle: noise must lie in [0, (l-1)/l]");
    }
}

LabelId UniformNoiseOracle::query(const Example& example, RandomStream& rng) const {
    if (example.true_label < 0 || example.true_label >= classes_) {
        throw std::invalid_argument("UniformNoiseOracle: example label out of range");
    }
    const double q = 1.0 - noise_;
    const double u = rng.next_double();
    if (u < q || noise_ == 0.0) {
        return example.true_label;
    }
    int idx = static_cast<int>((u - q) / noise_ * static_cast<double>(classes_ - 1));
    if (idx > classes_ - 2) idx = classes_ - 2;
    return idx >= example.true_label ? idx + 1 : idx;
}

VectorOracle::VectorOracle(ProbabilityVector p) : p_(std::move(p)) {}

LabelId VectorOracle::query(const Example& example, RandomStream& rng) const {
    if (example.true_label < 0 || example.true_label >= p_.classes()) {
        throw std::invalid_argument("VectorOracle: example label out of range");
    }
    const double u = rng.next_double();
    double cum = 0.0;
    for (int k = 0; k < p_.classes(); ++k) {
        cum += p_[k];
        if (u < cum) {
            return k;
        }
    }
    return p_.classes() - 1; // u landed in the rounding slack at the top
}

} // namespace labelsim

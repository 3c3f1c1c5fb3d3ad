#pragma once

#include <cstdint>

namespace labelsim {

// Counter-based deterministic random stream (SplitMix64 output function).
//
// Each (master_seed, stream_id) pair names an independent sequence; the
// i-th draw is a pure function of (master_seed, stream_id, i), so streams
// can be replayed, skipped ahead in O(1), and handed to workers in any
// order without changing results.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id),
          base_(mix(mix(master_seed) ^ (stream_id + kGamma))) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix(base_ + counter_ * kGamma);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform in [0, n); n >= 1. May consume more than one draw.
    std::uint64_t next_below(std::uint64_t n) {
        // Lemire's multiply-with-rejection.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Number of draws consumed so far; set_position(k) replays the stream
    // as if exactly k draws had been taken.
    std::uint64_t position() const { return counter_; }
    void set_position(std::uint64_t draws) { counter_ = draws; }
    void skip(std::uint64_t draws) { counter_ += draws; }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RandomStream(master_seed, stream_id);
}

} // namespace labelsim

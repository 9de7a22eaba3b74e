#pragma once

#include <cstdint>

namespace levyhom {

// splitmix64; used both as a seed mixer and to derive independent
// per-particle substreams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Counter-based generator: each draw is a hash of (key, counter). Streams
// with distinct keys are independent and jump-free, and the sequence does
// not depend on platform library details.
class CounterRng {
public:
    CounterRng() : key_(0), counter_(0) {}
    explicit CounterRng(std::uint64_t key) : key_(key), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t s = key_ + 0x632be59bd9b4e019ULL * (++counter_);
        return splitmix64(s);
    }

    // uniform in [0,1) with 53-bit resolution
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0,1], safe as a log() argument
    double next_uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_normal();

    double next_exponential();

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace levyhom

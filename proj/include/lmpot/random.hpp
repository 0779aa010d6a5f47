#pragma once

#include <cstdint>

namespace lmpot {

// Counter-based uniform generator. Output i is a bit-mixed function of
// (key, i), so identical (seed, stream_id) pairs give identical sequences on
// every platform, and distinct streams derived from the same seed are
// statistically independent. The mixer is the splitmix64 finalizer.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_(derive_key(seed, stream_id)), counter_(0) {}

    std::uint64_t next_u64() {
        counter_ += golden;
        return mix(counter_ ^ key_);
    }

    // Strictly inside (0,1). 52 random bits offset by half a step: every
    // value is exactly representable, so the top of the range is 1 - 2^-53
    // rather than rounding up to 1.0 (which 53 bits plus the offset would).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Independent child stream; does not advance this stream.
    RandomStream substream(std::uint64_t id) const {
        RandomStream child(0, 0);
        child.key_ = mix(key_ ^ mix((id + 1) * 0xd2b74407b1ce6e93ULL));
        child.counter_ = 0;
        return child;
    }

    // A fresh seed derived from this stream's identity, for handing to
    // components that take a seed rather than a stream.
    std::uint64_t fork_seed(std::uint64_t id) const {
        return mix(key_ + mix(id * golden + 0x8cb92ba72f3d8dd7ULL));
    }

private:
    static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
        return mix(mix(seed + golden) ^ mix(stream_id * 0xda942042e4dd58b5ULL + 1));
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace lmpot

#pragma once

#include <array>
#include <cstdint>

namespace fhl {

// Philox 4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so sample i of a stream can be produced on any worker,
// in any order, with bit-identical results.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

/// Uniform draws on the open interval (0,1) for one logical stream.
/// Stream identity is (seed, stream); successive calls advance a local
/// draw counter. Two doubles are carved out of each 128-bit block.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    double next_open01() {
        if (have_ == 0) {
            const auto out = Philox4x32::block(
                {static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                 static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
                key_);
            ++block_;
            cached_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
            cached_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
            have_ = 2;
        }
        const std::uint64_t bits = cached_[2 - have_];
        --have_;
        // 53 significant bits, shifted into (0,1): never exactly 0 or 1,
        // so log() and division stay safe downstream.
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> cached_{};
    int have_ = 0;
};

} // namespace fhl

#pragma once

#include <array>
#include <cstdint>

namespace bftest {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output
// for a (key, counter) pair is a pure function, so any number of streams can
// be derived from a seed without shared state.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key);
};

// Sequential draws from one Philox stream. The stream identity occupies
// counter words 1..3; word 0 counts blocks.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint32_t word1, std::uint32_t word2, std::uint32_t word3);

    std::uint32_t next_u32();
    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    // Standard normal by the Box-Muller transform.
    double normal();

private:
    Philox4x32::Key key_;
    Philox4x32::Block counter_;
    Philox4x32::Block buffer_{};
    int position_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bftest

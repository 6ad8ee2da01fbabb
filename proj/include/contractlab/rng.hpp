#pragma once

#include <array>
#include <cstdint>

namespace contractlab {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Counter-based stream keyed by (seed, stream id); independent of thread scheduling.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on (0, 1], safe for logarithms.
    double uniform_pos() { return 1.0 - uniform(); }
    double exponential(double rate);

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
};

} // namespace contractlab

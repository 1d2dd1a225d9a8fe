#pragma once

#include <array>
#include <cstdint>

namespace bsde::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox-4x32 with 10 rounds (Salmon et al., Random123). Stateless: the
/// output is a pure function of (counter, key).
Counter philox4x32(Counter counter, Key key) noexcept;

/// Independent draw streams derived from one user seed.
enum class Stream : std::uint32_t {
    brownian = 0,
    bootstrap = 1,
    sampler = 2,
    fixture = 3,
};

/// Key for a (seed, stream) pair. The brownian stream uses the raw seed.
Key stream_key(std::uint64_t seed, Stream stream) noexcept;

/// Maps 64 random bits to a double in the open interval (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Uniform (0,1) draw addressed by four 32-bit counter words.
double uniform(Key key, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) noexcept;

/// Standard normal quantile, Wichura's AS241 (PPND16); relative accuracy
/// about 1e-16. Part of the ensemble reproducibility contract.
double normal_quantile(double u) noexcept;

/// Convenience: counter-addressed standard normal draw.
inline double normal(Key key, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) noexcept {
    return normal_quantile(uniform(key, c0, c1, c2, c3));
}

/// Sequential helper over a counter-based stream: draw i of stream `lane`.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, Stream stream, std::uint64_t lane = 0) noexcept
        : key_(stream_key(seed, stream)), lane_(lane) {}

    double uniform() noexcept;
    double normal() noexcept { return normal_quantile(uniform()); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    Key key_;
    std::uint64_t lane_;
    std::uint64_t index_ = 0;
};

}  // namespace bsde::rng

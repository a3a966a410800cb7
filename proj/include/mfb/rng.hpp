#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mfb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A pure function of (key, counter); no internal state.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Sequential draws from the stream identified by (seed, particle, step).
///
/// Step -1 is reserved for initial-law sampling; grid steps start at 0.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t particle, std::int64_t step) noexcept;

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; the paired variate is cached.
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    Philox4x32::Counter counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Gaussian vector with mean 0 and covariance dt I, deterministic in (seed, particle, step).
void brownian_increment(std::uint64_t seed, std::uint64_t particle, std::int64_t step, double dt,
                        std::span<double> out) noexcept;
std::vector<double> brownian_increment(std::uint64_t seed, std::uint64_t particle, std::int64_t step, double dt,
                                       std::size_t dim);

/// SplitMix64 finalizer; used to derive independent seeds (e.g. a second flow ensemble).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace mfb

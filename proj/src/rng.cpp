#include "mfb/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfb {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t particle, std::int64_t step) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
               static_cast<std::uint32_t>(step + 1), 0u} {}

void CounterStream::refill() noexcept {
    block_ = Philox4x32::generate(counter_, key_);
    ++counter_[3];
    used_ = 0;
}

double CounterStream::uniform() noexcept {
    if (used_ > 2) refill();
    const std::uint64_t bits = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
    used_ += 2;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void brownian_increment(std::uint64_t seed, std::uint64_t particle, std::int64_t step, double dt,
                        std::span<double> out) noexcept {
    CounterStream stream(seed, particle, step);
    const double scale = std::sqrt(dt);
    for (double& v : out) v = scale * stream.normal();
}

std::vector<double> brownian_increment(std::uint64_t seed, std::uint64_t particle, std::int64_t step, double dt,
                                       std::size_t dim) {
    std::vector<double> out(dim);
    brownian_increment(seed, particle, step, dt, out);
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace mfb

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mfb {

enum class LawKind { dirac, gaussian, uniform_box, two_point };

LawKind parse_law_kind(std::string_view name);
const char* to_string(LawKind kind);

/// Initial distribution mu.
///
/// dirac: `location`; gaussian: `location` + isotropic standard deviation `scale`;
/// uniform_box: [`lower`, `upper`] per coordinate; two_point: `location` with
/// probability `weight`, `other` otherwise. Empty vectors mean the origin.
struct InitialLaw {
    LawKind kind = LawKind::dirac;
    std::vector<double> location;
    double scale = 1.0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> other;
    double weight = 0.5;

    /// Throws InvalidLaw on malformed parameters for dimension `dim`.
    void check(std::size_t dim) const;
};

/// Particle-system state: X^i and, when an estimator asks for them, the variation
/// vectors v^i and Jacobians J^i (d x d row-major per particle).
struct Ensemble {
    std::size_t n = 0;
    std::size_t dim = 1;
    std::vector<double> positions;
    std::vector<double> variations;
    std::vector<double> jacobians;
    std::uint64_t seed = 0;
    std::size_t step_index = 0;
    /// RNG stream label of each particle; the identity unless relabelled.
    std::vector<std::uint64_t> streams;

    std::span<double> position(std::size_t i) { return {positions.data() + i * dim, dim}; }
    std::span<const double> position(std::size_t i) const { return {positions.data() + i * dim, dim}; }
    std::span<double> variation(std::size_t i) { return {variations.data() + i * dim, dim}; }
    std::span<const double> variation(std::size_t i) const { return {variations.data() + i * dim, dim}; }
    std::span<double> jacobian(std::size_t i) { return {jacobians.data() + i * dim * dim, dim * dim}; }
    std::span<const double> jacobian(std::size_t i) const { return {jacobians.data() + i * dim * dim, dim * dim}; }

    /// Resets every J^i to the identity.
    void init_jacobians();
};

/// Samples N i.i.d. positions from `law`; particle i draws from stream (seed, i, step -1).
Ensemble init_ensemble(const InitialLaw& law, std::size_t n, std::size_t dim, std::uint64_t seed);

/// Ensemble with the given positions (row-major N x d) at step 0.
Ensemble make_ensemble(std::vector<double> positions, std::size_t dim, std::uint64_t seed);

/// Writes the Brownian increments of step m for every particle (N x d row-major).
void draw_increments(const Ensemble& ens, std::size_t m, double dt, std::span<double> out);

}  // namespace mfb

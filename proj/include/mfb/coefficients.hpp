#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace mfb {

/// Drift b_t(x) and diffusion sigma_t(x) together with their analytic Jacobians.
///
/// All matrices are d x d row-major. `diffusion_jacobian(t, x, v, out)` writes the
/// directional derivative d/de sigma_t(x + e v) at e = 0.
struct CoefficientSet {
    using VectorField = std::function<void(double, std::span<const double>, std::span<double>)>;
    using DirectionalField =
        std::function<void(double, std::span<const double>, std::span<const double>, std::span<double>)>;

    std::size_t dim = 1;
    VectorField drift;
    VectorField drift_jacobian;
    VectorField diffusion;
    DirectionalField diffusion_jacobian;

    /// sigma does not depend on (t, x); zeta can be computed once.
    bool constant_diffusion = false;
};

enum class DriftKind { zero, constant, linear, diagonal };
enum class DiffusionKind { constant, diagonal };

DriftKind parse_drift_kind(std::string_view name);
DiffusionKind parse_diffusion_kind(std::string_view name);
const char* to_string(DriftKind kind);
const char* to_string(DiffusionKind kind);

struct DriftFamily {
    DriftKind kind = DriftKind::zero;
    std::vector<double> offset;  // constant: b = offset; linear: b = A x + offset
    std::vector<double> matrix;  // linear: A, d x d row-major
    double amplitude = 0.0;      // diagonal: b_k = amplitude * sin(x_k)
};

struct DiffusionFamily {
    DiffusionKind kind = DiffusionKind::constant;
    std::vector<double> matrix;  // constant: sigma, d x d row-major
    double base = 1.0;           // diagonal: sigma_kk = base + amplitude * sin(x_k)
    double amplitude = 0.0;
};

/// Builds a coefficient set from the built-in families. Empty offset/matrix
/// entries default to zero vector / identity. Throws InvalidArgument on shape
/// mismatches and SingularDiffusion if sigma can degenerate.
CoefficientSet make_coefficients(std::size_t dim, const DriftFamily& drift, const DiffusionFamily& diffusion);

/// zeta = sigma^* (sigma sigma^*)^{-1} at (t, x), d x d row-major; the Girsanov
/// weight matrix paired with dW. Equals sigma (sigma sigma^*)^{-1} for symmetric sigma.
/// Throws SingularDiffusion when cond(sigma sigma^*) exceeds 1e12.
std::vector<double> zeta(const CoefficientSet& coeffs, double t, std::span<const double> x);
void zeta_of(std::span<const double> sigma, std::size_t dim, std::span<double> out);

}  // namespace mfb

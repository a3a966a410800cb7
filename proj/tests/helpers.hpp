#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mfb/coefficients.hpp"
#include "mfb/kernel.hpp"

namespace mfb::testing {

/// b(x) = a x per coordinate, sigma = s I; s = 0 gives a deterministic ODE.
inline CoefficientSet scalar_linear(std::size_t dim, double a, double s) {
    CoefficientSet c;
    c.dim = dim;
    c.constant_diffusion = true;
    c.drift = [a](double, std::span<const double> x, std::span<double> out) {
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = a * x[k];
    };
    c.drift_jacobian = [a, dim](double, std::span<const double>, std::span<double> out) {
        for (std::size_t k = 0; k < dim * dim; ++k) out[k] = (k % (dim + 1) == 0) ? a : 0.0;
    };
    c.diffusion = [s, dim](double, std::span<const double>, std::span<double> out) {
        for (std::size_t k = 0; k < dim * dim; ++k) out[k] = (k % (dim + 1) == 0) ? s : 0.0;
    };
    c.diffusion_jacobian = [](double, std::span<const double>, std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    return c;
}

inline KernelSpec gaussian_kernel(double c = 0.5, double kappa = 0.0) {
    return KernelSpec{KernelKind::gaussian_linear, c, kappa, 0.0, 0.0};
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace mfb::testing

#include <cmath>

#include "pair_kernels.hpp"

namespace mfb::simd::detail {

bool pair_range_scalar(const PairArgs& a) {
    const std::size_t d = a.dim;
    const std::size_t n = a.n;
    double z[16];
    double u[16];
    for (std::size_t j = a.begin; j < a.end; ++j) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            z[k] = a.x[k] - a.ys[k * n + j];
            r2 += z[k] * z[k];
        }
        // g = s z, grad g = s I + q z z^T
        double s;
        double q;
        if (a.kind == SpatialKind::gaussian) {
            s = std::exp(-r2);
            q = -2.0 * s;
        } else {
            const double rho2 = r2 + a.delta2;
            if (rho2 == 0.0) return false;
            s = std::pow(rho2, a.exponent);
            q = 2.0 * a.exponent * s / rho2;
        }
        if (a.want_value) {
            for (std::size_t k = 0; k < d; ++k) a.value[k] += s * z[k];
        }
        if (a.want_grad) {
            for (std::size_t r = 0; r < d; ++r) {
                for (std::size_t c = 0; c < d; ++c) a.grad[r * d + c] += (r == c ? s : 0.0) + q * z[r] * z[c];
            }
        }
        if (a.want_weighted) {
            double zw = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                u[k] = a.ws[k * n + j];
                zw += z[k] * u[k];
            }
            for (std::size_t k = 0; k < d; ++k) a.weighted[k] += s * u[k] + q * z[k] * zw;
        }
        if (a.want_difference) {
            double zw = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                u[k] = a.w_self[k] - a.ws[k * n + j];
                zw += z[k] * u[k];
            }
            for (std::size_t k = 0; k < d; ++k) a.difference[k] += s * u[k] + q * z[k] * zw;
        }
    }
    return true;
}

}  // namespace mfb::simd::detail

#include "dynamics.hpp"

#include <cmath>
#include <string>

#include "mfb/error.hpp"
#include "mfb/parallel.hpp"

namespace mfb::detail {

namespace {

InteractionField allocate(const Ensemble& ens, const PairRequest& request) {
    const std::size_t n = ens.n;
    const std::size_t d = ens.dim;
    InteractionField field;
    field.drift.assign(request.value ? n * d : 0, 0.0);
    field.grad.assign(request.grad ? n * d * d : 0, 0.0);
    field.weighted.assign(request.grad_weighted ? n * d : 0, 0.0);
    field.difference.assign(request.grad_difference ? n * d : 0, 0.0);
    return field;
}

template <class Span>
Span slice(Span s, std::size_t i, std::size_t width, bool active) {
    return active ? s.subspan(i * width, width) : Span{};
}

void fill_field(InteractionField& field, const Ensemble& ens, const PointCloud& points, const PointCloud* weights,
                const KernelSpec& kernel, double scale, bool exclude_self, const PairRequest& request) {
    const std::size_t d = ens.dim;
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            PairOutput out{slice(std::span<double>(field.drift), i, d, request.value),
                           slice(std::span<double>(field.grad), i, d * d, request.grad),
                           slice(std::span<double>(field.weighted), i, d, request.grad_weighted),
                           slice(std::span<double>(field.difference), i, d, request.grad_difference)};
            std::span<const double> self = request.grad_difference ? ens.variation(i) : std::span<const double>{};
            pair_sums(kernel, ens.position(i), points, weights, self,
                      exclude_self ? static_cast<std::ptrdiff_t>(i) : -1, request, out);
            for (double& v : out.value) v *= scale;
            for (double& v : out.grad) v *= scale;
            for (double& v : out.grad_weighted) v *= scale;
            for (double& v : out.grad_difference) v *= scale;
        }
    });
}

}  // namespace

InteractionField interacting_field(const Ensemble& ens, const KernelSpec& kernel, double kernel_t,
                                   const PairRequest& request) {
    InteractionField field = allocate(ens, request);
    if (kernel.is_zero() || ens.n < 2) return field;
    const bool weighted = request.grad_weighted || request.grad_difference;
    if (weighted && ens.variations.size() != ens.n * ens.dim) {
        throw Error(ErrorCode::invalid_argument, "variation field requested without variations");
    }
    const PointCloud points = PointCloud::from_rows(ens.positions, ens.dim);
    std::optional<PointCloud> weights;
    if (weighted) weights = PointCloud::from_rows(ens.variations, ens.dim);
    const double scale = kernel_time_factor(kernel, kernel_t) / static_cast<double>(ens.n - 1);
    fill_field(field, ens, points, weights ? &*weights : nullptr, kernel, scale, true, request);
    return field;
}

InteractionField flow_field(const Ensemble& ens, std::span<const double> snapshot, const KernelSpec& kernel,
                            double kernel_t, FlowAverage average, const PairRequest& request) {
    PairRequest req = request;
    req.grad_weighted = false;
    req.grad_difference = false;
    InteractionField field = allocate(ens, req);
    if (kernel.is_zero()) return field;
    const PointCloud points = PointCloud::from_rows(snapshot, ens.dim);
    const bool exclude = average == FlowAverage::exclude_same_index;
    if (exclude && points.n < 2) return field;
    const double norm = exclude ? static_cast<double>(points.n - 1) : static_cast<double>(points.n);
    const double scale = kernel_time_factor(kernel, kernel_t) / norm;
    fill_field(field, ens, points, nullptr, kernel, scale, exclude, req);
    return field;
}

void update_positions(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                      std::span<const double> increments, const InteractionField& field, std::size_t m) {
    const std::size_t d = ens.dim;
    const bool interacting = !field.drift.empty();
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> b(d);
        std::vector<double> sigma(d * d);
        for (std::size_t i = begin; i < end; ++i) {
            auto x = ens.position(i);
            coeffs.drift(t, x, b);
            coeffs.diffusion(t, x, sigma);
            const double* dw = increments.data() + i * d;
            for (std::size_t k = 0; k < d; ++k) {
                double noise = 0.0;
                for (std::size_t l = 0; l < d; ++l) noise += sigma[k * d + l] * dw[l];
                const double drift = interacting ? b[k] + field.drift[i * d + k] : b[k];
                b[k] = x[k] + drift * dt + noise;
            }
            for (std::size_t k = 0; k < d; ++k) {
                if (!std::isfinite(b[k])) {
                    throw Error(ErrorCode::non_finite, "position of particle " + std::to_string(i) + " is not finite",
                                m);
                }
                x[k] = b[k];
            }
        }
    });
}

void update_variations(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                       std::span<const double> increments, const InteractionField& field, std::size_t m) {
    const std::size_t d = ens.dim;
    const bool interacting = !field.difference.empty();
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> grad_b(d * d);
        std::vector<double> grad_sigma(d * d);
        std::vector<double> next(d);
        for (std::size_t i = begin; i < end; ++i) {
            auto x = ens.position(i);
            auto v = ens.variation(i);
            coeffs.drift_jacobian(t, x, grad_b);
            coeffs.diffusion_jacobian(t, x, v, grad_sigma);
            const double* dw = increments.data() + i * d;
            for (std::size_t k = 0; k < d; ++k) {
                double drift = 0.0;
                double noise = 0.0;
                for (std::size_t l = 0; l < d; ++l) {
                    drift += grad_b[k * d + l] * v[l];
                    noise += grad_sigma[k * d + l] * dw[l];
                }
                if (interacting) drift += field.difference[i * d + k];
                next[k] = v[k] + drift * dt + noise;
            }
            for (std::size_t k = 0; k < d; ++k) {
                if (!std::isfinite(next[k])) {
                    throw Error(ErrorCode::non_finite, "variation of particle " + std::to_string(i) + " is not finite",
                                m);
                }
                v[k] = next[k];
            }
        }
    });
}

void update_jacobians(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                      std::span<const double> increments, const InteractionField& field, std::size_t m) {
    const std::size_t d = ens.dim;
    const bool interacting = !field.grad.empty();
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> grad_b(d * d);
        std::vector<double> grad_sigma(d * d);
        std::vector<double> column(d);
        std::vector<double> next(d * d);
        for (std::size_t i = begin; i < end; ++i) {
            auto x = ens.position(i);
            auto jac = ens.jacobian(i);
            coeffs.drift_jacobian(t, x, grad_b);
            if (interacting) {
                for (std::size_t k = 0; k < d * d; ++k) grad_b[k] += field.grad[i * d * d + k];
            }
            const double* dw = increments.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) {
                for (std::size_t k = 0; k < d; ++k) column[k] = jac[k * d + c];
                coeffs.diffusion_jacobian(t, x, column, grad_sigma);
                for (std::size_t r = 0; r < d; ++r) {
                    double drift = 0.0;
                    double noise = 0.0;
                    for (std::size_t l = 0; l < d; ++l) {
                        drift += grad_b[r * d + l] * column[l];
                        noise += grad_sigma[r * d + l] * dw[l];
                    }
                    next[r * d + c] = column[r] + drift * dt + noise;
                }
            }
            for (std::size_t k = 0; k < d * d; ++k) {
                if (!std::isfinite(next[k])) {
                    throw Error(ErrorCode::non_finite, "jacobian of particle " + std::to_string(i) + " is not finite",
                                m);
                }
                jac[k] = next[k];
            }
        }
    });
}

std::vector<double> step_increments(const Ensemble& ens, std::size_t m, double dt) {
    std::vector<double> dw(ens.n * ens.dim);
    draw_increments(ens, m, dt, dw);
    return dw;
}

void require_step(const Ensemble& ens, std::size_t m, const TimeGrid& grid) {
    if (m >= grid.M) throw Error(ErrorCode::out_of_range, "step index beyond the grid");
    if (ens.step_index != m) {
        throw Error(ErrorCode::invalid_argument, "ensemble is at step " + std::to_string(ens.step_index) +
                                                     ", asked to advance step " + std::to_string(m));
    }
}

}  // namespace mfb::detail

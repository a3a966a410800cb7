#include "mfb/kernel.hpp"

#include <cmath>
#include <string>

#include "mfb/error.hpp"

namespace mfb {

namespace {

double squared_norm(std::span<const double> z) {
    double r2 = 0.0;
    for (double zi : z) r2 += zi * zi;
    return r2;
}

void check_args(const KernelSpec& spec, double t, std::span<const double> z) {
    if (!(t > 0.0)) {
        throw Error(ErrorCode::out_of_range, "kernel evaluated at non-positive time t=" + std::to_string(t));
    }
    if (spec.kind == KernelKind::coulomb && spec.delta == 0.0 && squared_norm(z) == 0.0) {
        throw Error(ErrorCode::singular_evaluation, "coulomb kernel with delta=0 evaluated at z=0");
    }
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, std::string(what) + " produced a non-finite value");
    }
}

}  // namespace

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "zero") return KernelKind::zero;
    if (name == "gaussian_linear") return KernelKind::gaussian_linear;
    if (name == "coulomb") return KernelKind::coulomb;
    throw Error(ErrorCode::invalid_argument, "unknown kernel kind '" + std::string(name) + "'");
}

const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::zero: return "zero";
        case KernelKind::gaussian_linear: return "gaussian_linear";
        case KernelKind::coulomb: return "coulomb";
    }
    return "zero";
}

void KernelSpec::check() const {
    if (!(kappa >= 0.0)) throw Error(ErrorCode::invalid_argument, "kernel kappa must be >= 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorCode::invalid_argument, "kernel beta must lie in [0, 1)");
    if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "kernel delta must be >= 0");
    if (!std::isfinite(amplitude)) throw Error(ErrorCode::invalid_argument, "kernel amplitude must be finite");
}

double kernel_time_factor(const KernelSpec& spec, double t) {
    if (spec.kappa == 0.0) return spec.amplitude;
    return spec.amplitude * std::pow(t, spec.kappa);
}

void kernel_eval(const KernelSpec& spec, double t, std::span<const double> z, std::span<double> out) {
    check_args(spec, t, z);
    const double r2 = squared_norm(z);
    double scale = 0.0;
    switch (spec.kind) {
        case KernelKind::zero: break;
        case KernelKind::gaussian_linear: scale = kernel_time_factor(spec, t) * std::exp(-r2); break;
        case KernelKind::coulomb:
            scale = kernel_time_factor(spec, t) * std::pow(r2 + spec.delta * spec.delta, -0.5 * (spec.beta + 1.0));
            break;
    }
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = scale * z[i];
    check_finite(out, "kernel_eval");
}

std::vector<double> kernel_eval(const KernelSpec& spec, double t, std::span<const double> z) {
    std::vector<double> out(z.size());
    kernel_eval(spec, t, z, out);
    return out;
}

void kernel_grad(const KernelSpec& spec, double t, std::span<const double> z, std::span<double> out) {
    check_args(spec, t, z);
    const std::size_t d = z.size();
    const double r2 = squared_norm(z);
    // h_i = s(r2) z_i  =>  d_j h_i = s delta_ij + 2 s'(r2) z_i z_j
    double s = 0.0;
    double two_ds = 0.0;
    switch (spec.kind) {
        case KernelKind::zero: break;
        case KernelKind::gaussian_linear: {
            const double e = kernel_time_factor(spec, t) * std::exp(-r2);
            s = e;
            two_ds = -2.0 * e;
            break;
        }
        case KernelKind::coulomb: {
            const double rho2 = r2 + spec.delta * spec.delta;
            s = kernel_time_factor(spec, t) * std::pow(rho2, -0.5 * (spec.beta + 1.0));
            two_ds = -(spec.beta + 1.0) * s / rho2;
            break;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out[i * d + j] = (i == j ? s : 0.0) + two_ds * z[i] * z[j];
        }
    }
    check_finite(out, "kernel_grad");
}

std::vector<double> kernel_grad(const KernelSpec& spec, double t, std::span<const double> z) {
    std::vector<double> out(z.size() * z.size());
    kernel_grad(spec, t, z, out);
    return out;
}

}  // namespace mfb

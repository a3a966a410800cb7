#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace mfb {

enum class KernelKind { zero, gaussian_linear, coulomb };

KernelKind parse_kernel_kind(std::string_view name);
const char* to_string(KernelKind kind);

/// Interaction kernel h_t(z) = c t^kappa g(z) entering the drift as h_t * mu_t.
///
/// g(z) = z exp(-|z|^2) for gaussian_linear and z (|z|^2 + delta^2)^{-(beta+1)/2}
/// for coulomb. With delta = 0 the coulomb kernel is singular at the origin.
struct KernelSpec {
    KernelKind kind = KernelKind::zero;
    double amplitude = 1.0;
    double kappa = 0.0;
    double beta = 0.0;
    double delta = 0.0;

    bool is_zero() const noexcept { return kind == KernelKind::zero || amplitude == 0.0; }

    /// Throws InvalidArgument on kappa < 0, beta outside [0,1) or delta < 0.
    void check() const;
};

/// c * t^kappa; the time-dependent prefactor shared by h and its gradient.
double kernel_time_factor(const KernelSpec& spec, double t);

void kernel_eval(const KernelSpec& spec, double t, std::span<const double> z, std::span<double> out);
std::vector<double> kernel_eval(const KernelSpec& spec, double t, std::span<const double> z);

/// Jacobian of z -> h_t(z), row-major: out[i * d + j] = d h_i / d z_j.
void kernel_grad(const KernelSpec& spec, double t, std::span<const double> z, std::span<double> out);
std::vector<double> kernel_grad(const KernelSpec& spec, double t, std::span<const double> z);

}  // namespace mfb

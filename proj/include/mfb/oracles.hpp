#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mfb/assumptions.hpp"
#include "mfb/bismut.hpp"

namespace mfb {

/// Least-squares fit of log y against log x (unweighted); needs >= 3 points with x, y > 0.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Common-random-numbers finite differences

struct FdRow {
    double epsilon = 0.0;
    Estimate estimate;
};

/// (mean f(X_T^eps) - mean f(X_T)) / eps with X_0^eps = X_0 + eps phi(X_0) and
/// identical increments; the error is the SE of the per-path quotient.
Estimate fd_intrinsic_derivative(const Experiment& experiment, const DirectionMap& phi, double epsilon);

/// Same quotient for every epsilon, sharing one unperturbed run.
std::vector<FdRow> fd_family(const Experiment& experiment, const DirectionMap& phi, std::span<const double> epsilons);

// ---------------------------------------------------------------------------
// Girsanov weights

struct GirsanovResult {
    double epsilon = 0.0;
    std::vector<double> weights;  // R per path
    Estimate mean_weight;
    Estimate mean_abs_dev;        // E |R - 1|^n
    bool exact = false;           // every weight is exactly 1
};

/// Weights R = exp(sum <Xi, dW> - 1/2 sum |Xi|^2 dt) along the perturbed paths with
/// Xi_m = zeta(X^eps)[B(X^eps; mu_m) - B(X^eps; mu^eps_m)], both drifts taken
/// against the recorded empirical flows with the path's own index left out. Throws NonFinite on a non-finite weight.
GirsanovResult girsanov_weight(const Experiment& experiment, const DirectionMap& phi, double epsilon,
                               double moment = 1.0);

struct GirsanovOrderReport {
    std::vector<GirsanovResult> rows;  // weights dropped
    double moment = 1.0;
    double slope = 0.0;
    bool degenerate = false;  // all deviations exactly zero, no slope fitted
};

GirsanovOrderReport girsanov_order_check(const Experiment& experiment, const DirectionMap& phi,
                                         std::span<const double> epsilons, double moment = 1.0);

// ---------------------------------------------------------------------------
// Kernel-gradient moment probe

enum class ZMode { paired, fixed };

ZMode parse_z_mode(std::string_view name);
const char* to_string(ZMode mode);

struct ScalingRow {
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double slope = 0.0;
    double theoretical_exponent = 0.0;
    /// Smallest C with value <= C t^exponent at every probe time.
    double envelope_constant = 0.0;
    ZMode mode = ZMode::paired;
};

/// M(t) = (mean ||grad h_t(z - X_t)||^{p/(p-1)})^{(p-1)/p} at the grid nodes nearest to
/// each probe time. paired: z is another particle; fixed: max over a 3^d grid of z
/// around the ensemble mean (a lower bound on the sup over z).
ScalingReport kernel_scaling_probe(const Experiment& experiment, const AssumptionParams& params, ZMode mode,
                                   std::span<const double> probe_times);

// ---------------------------------------------------------------------------
// Variation convergence

struct VarCheckRow {
    double epsilon = 0.0;
    Estimate sup_error_p;  // mean over particles of sup_t |(X^eps - X)/eps - v|^p
};

struct VarCheckReport {
    std::vector<VarCheckRow> rows;
    double p = 2.0;
    double order = 0.0;  // fitted slope of the error against epsilon (0 if < 3 points or degenerate)
    bool degenerate = false;
    /// Every row is below (1e-9)^p: the quotient equals v up to rounding, which
    /// grows like 1/eps, so the rows carry no convergence information.
    bool at_rounding_level = false;
};

inline constexpr double kVariationRoundingError = 1e-9;

VarCheckReport fd_variation_check(const Experiment& experiment, const DirectionMap& phi,
                                  std::span<const double> epsilons, double p);

}  // namespace mfb

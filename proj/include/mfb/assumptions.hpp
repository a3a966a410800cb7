#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mfb/kernel.hpp"

namespace mfb {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Integrability indices and moment exponent under which the derivative formula holds.
/// k = k_prime = infinity denotes a bounded kernel (gradient).
struct AssumptionParams {
    int d = 1;
    double T = 1.0;
    double kappa = 0.0;
    double beta = 0.0;
    double k = kUnbounded;
    double k_prime = kUnbounded;
    double p = 2.0;
};

struct AssumptionCheck {
    std::string name;
    double value = 0.0;   // left-hand side
    double bound = 0.0;   // right-hand side
    std::string relation; // ">", ">=", "<"
    double margin = 0.0;  // signed distance to the bound, positive when satisfied
    bool passed = false;
    bool vacuous = false;
};

/// Admissible moment exponents: p >= lower_closed and p > lower_open.
struct ExponentInterval {
    double lower_closed = 1.0;
    double lower_open = 1.0;

    double lower() const { return lower_closed > lower_open ? lower_closed : lower_open; }
    bool lower_is_strict() const { return lower_open >= lower_closed; }
    bool contains(double p) const { return p >= lower_closed && p > lower_open; }
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    ExponentInterval p_interval;

    bool all_passed() const;
    std::vector<const AssumptionCheck*> failures() const;
};

ValidationReport validate_assumptions(const AssumptionParams& params, const KernelSpec& spec);

/// Exponent kappa - d p / (2 k' (p - 1)) of the small-time bound on the kernel gradient moment.
double kernel_gradient_exponent(const AssumptionParams& params);

}  // namespace mfb

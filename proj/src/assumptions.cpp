#include "mfb/assumptions.hpp"

#include <algorithm>
#include <cmath>

namespace mfb {

namespace {

AssumptionCheck greater(std::string name, double value, double bound, bool strict = true) {
    AssumptionCheck c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.relation = strict ? ">" : ">=";
    c.margin = value - bound;
    if (std::isinf(value) && std::isinf(bound) && value == bound) c.margin = 0.0;
    c.passed = strict ? value > bound : value >= bound;
    return c;
}

AssumptionCheck less(std::string name, double value, double bound) {
    AssumptionCheck c;
    c.name = std::move(name);
    c.value = value;
    c.bound = bound;
    c.relation = "<";
    c.margin = bound - value;
    if (std::isinf(value) && std::isinf(bound) && value == bound) c.margin = 0.0;
    c.passed = value < bound;
    return c;
}

AssumptionCheck vacuous(std::string name) {
    AssumptionCheck c;
    c.name = std::move(name);
    c.relation = "n/a";
    c.passed = true;
    c.vacuous = true;
    return c;
}

// d / q with q = infinity meaning a bounded term.
double ratio(double d, double q) { return std::isinf(q) ? 0.0 : d / q; }

}  // namespace

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

std::vector<const AssumptionCheck*> ValidationReport::failures() const {
    std::vector<const AssumptionCheck*> out;
    for (const auto& c : checks) {
        if (!c.passed) out.push_back(&c);
    }
    return out;
}

double kernel_gradient_exponent(const AssumptionParams& params) {
    if (std::isinf(params.k_prime)) return params.kappa;
    return params.kappa - params.d * params.p / (2.0 * params.k_prime * (params.p - 1.0));
}

ValidationReport validate_assumptions(const AssumptionParams& params, const KernelSpec& spec) {
    ValidationReport report;
    auto& checks = report.checks;
    const double d = params.d;
    const double kappa = params.kappa;
    const double kp = params.k_prime;

    checks.push_back(greater("d >= 1", d, 1.0, false));
    checks.push_back(greater("T > 0", params.T, 0.0));
    checks.push_back(greater("kappa >= 0", kappa, 0.0, false));

    if (std::isinf(params.k)) {
        checks.push_back(vacuous("k > d (bounded kernel)"));
    } else {
        checks.push_back(greater("k > d", params.k, d));
    }
    if (std::isinf(kp)) {
        checks.push_back(vacuous("k' > 1 (bounded kernel gradient)"));
    } else {
        checks.push_back(greater("k' > 1", kp, 1.0));
    }
    checks.push_back(greater("2 kappa - d/k' > -1", 2.0 * kappa - ratio(d, kp), -1.0));

    // p interval: p >= 2k'(kappa+1)/(2k'(kappa+1)-d) and p > k'/(k'-1); both tend to 1 as k' -> inf.
    ExponentInterval interval;
    if (!std::isinf(kp)) {
        const double num = 2.0 * kp * (kappa + 1.0);
        interval.lower_closed = num > d ? num / (num - d) : kUnbounded;
        interval.lower_open = kp > 1.0 ? kp / (kp - 1.0) : kUnbounded;
    }
    report.p_interval = interval;
    checks.push_back(greater("p >= 2k'(kappa+1)/(2k'(kappa+1)-d)", params.p, interval.lower_closed, false));
    checks.push_back(greater("p > k'/(k'-1)", params.p, interval.lower_open));

    if (spec.kind == KernelKind::coulomb) {
        const double beta = params.beta;
        checks.push_back(greater("coulomb: d >= 2", d, 2.0, false));
        checks.push_back(greater("coulomb: kappa > beta/2", kappa, beta / 2.0));
        checks.push_back(greater("coulomb: k > d", params.k, d));
        checks.push_back(less("coulomb: k < d/beta", params.k, beta > 0.0 ? d / beta : kUnbounded));
        checks.push_back(greater("coulomb: k' > max(1, d/(2 kappa + 1))", kp, std::max(1.0, d / (2.0 * kappa + 1.0))));
        checks.push_back(less("coulomb: k' < d/(beta + 1)", kp, d / (beta + 1.0)));
    } else {
        const char* why = spec.kind == KernelKind::zero ? " (no interaction)" : " (bounded kernel)";
        checks.push_back(vacuous(std::string("coulomb: kappa > beta/2") + why));
        checks.push_back(vacuous(std::string("coulomb: k in (d, d/beta)") + why));
        checks.push_back(vacuous(std::string("coulomb: k' in (max(1, d/(2 kappa + 1)), d/(beta + 1))") + why));
    }
    return report;
}

}  // namespace mfb

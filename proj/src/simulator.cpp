#include "mfb/simulator.hpp"

#include <cmath>
#include <string>

#include "dynamics.hpp"
#include "mfb/error.hpp"

namespace mfb {

void require_finite(std::span<const double> values, std::size_t m, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, std::string(what) + " is not finite", m);
    }
}

void step_mv(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel, const TimeGrid& grid,
             std::size_t m) {
    advance_interacting(ens, coeffs, kernel, grid, m, InteractingOptions{});
}

void advance_interacting(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                         const TimeGrid& grid, std::size_t m, const InteractingOptions& options,
                         const StepObserver& observer) {
    detail::require_step(ens, m, grid);
    if (options.variation && ens.variations.size() != ens.n * ens.dim) {
        throw Error(ErrorCode::invalid_argument, "variation dynamics requested on an ensemble without variations");
    }
    const double t = grid.nodes[m];
    const double dt = grid.dt(m);
    const double kernel_t = grid.kernel_time(m);
    PairRequest request;
    request.value = true;
    request.grad_difference = options.variation;
    request.grad_weighted = options.term2_field;
    const InteractionField field = detail::interacting_field(ens, kernel, kernel_t, request);
    const std::vector<double> dw = detail::step_increments(ens, m, dt);
    if (observer) observer(StepView{m, t, dt, kernel_t, ens, dw, field});
    if (options.variation) detail::update_variations(ens, coeffs, t, dt, dw, field, m);
    detail::update_positions(ens, coeffs, t, dt, dw, field, m);
    ens.step_index = m + 1;
}

SimulationResult simulate_mv(const InitialLaw& law, const CoefficientSet& coeffs, const KernelSpec& kernel,
                             const TimeGrid& grid, std::size_t n, std::uint64_t seed, bool record_flow) {
    return simulate_mv(init_ensemble(law, n, coeffs.dim, seed), coeffs, kernel, grid, record_flow);
}

SimulationResult simulate_mv(Ensemble ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                             const TimeGrid& grid, bool record_flow, const InteractingOptions& options,
                             const StepObserver& observer) {
    if (ens.dim != coeffs.dim) throw Error(ErrorCode::invalid_argument, "ensemble and coefficient dimensions differ");
    ens.step_index = 0;
    SimulationResult result;
    if (record_flow) {
        MeasureFlow flow;
        flow.grid = grid;
        flow.n = ens.n;
        flow.dim = ens.dim;
        flow.snapshots.reserve(grid.M + 1);
        flow.snapshots.push_back(ens.positions);
        result.flow = std::move(flow);
    }
    for (std::size_t m = 0; m < grid.M; ++m) {
        advance_interacting(ens, coeffs, kernel, grid, m, options, observer);
        if (record_flow) result.flow->snapshots.push_back(ens.positions);
    }
    result.ensemble = std::move(ens);
    return result;
}

void advance_decoupled(Ensemble& ens, const MeasureFlow& flow, const CoefficientSet& coeffs,
                       const KernelSpec& kernel, std::size_t m, const DecoupledOptions& options,
                       const StepObserver& observer) {
    const TimeGrid& grid = flow.grid;
    detail::require_step(ens, m, grid);
    const double t = grid.nodes[m];
    const double dt = grid.dt(m);
    const double kernel_t = grid.kernel_time(m);
    InteractionField field;
    if (!kernel.is_zero()) {
        if (!flow.has_snapshots() || flow.snapshots.size() != grid.M + 1) {
            throw Error(ErrorCode::invalid_argument, "decoupled run needs a recorded measure flow");
        }
        PairRequest request;
        request.value = true;
        request.grad = options.jacobian;
        field = detail::flow_field(ens, flow.snapshots[m], kernel, kernel_t, options.average, request);
    }
    const std::vector<double> dw = detail::step_increments(ens, m, dt);
    if (observer) observer(StepView{m, t, dt, kernel_t, ens, dw, field});
    if (options.jacobian) detail::update_jacobians(ens, coeffs, t, dt, dw, field, m);
    detail::update_positions(ens, coeffs, t, dt, dw, field, m);
    ens.step_index = m + 1;
}

Ensemble simulate_decoupled(std::span<const double> x0, const MeasureFlow& flow, const CoefficientSet& coeffs,
                            const KernelSpec& kernel, std::uint64_t seed, const DecoupledOptions& options,
                            const StepObserver& observer) {
    if (flow.dim != coeffs.dim) throw Error(ErrorCode::invalid_argument, "flow and coefficient dimensions differ");
    if (!kernel.is_zero() && x0.size() / coeffs.dim != flow.n && options.average == FlowAverage::exclude_same_index) {
        throw Error(ErrorCode::invalid_argument, "index-matched averaging needs as many particles as flow samples");
    }
    Ensemble ens = make_ensemble(std::vector<double>(x0.begin(), x0.end()), coeffs.dim, seed);
    if (options.jacobian) ens.init_jacobians();
    for (std::size_t m = 0; m < flow.grid.M; ++m) advance_decoupled(ens, flow, coeffs, kernel, m, options, observer);
    return ens;
}

Estimate mean_and_se(std::span<const double> samples) {
    Estimate e;
    const std::size_t n = samples.size();
    if (n == 0) return e;
    double sum = 0.0;
    for (double s : samples) sum += s;
    e.mean = sum / static_cast<double>(n);
    // One correction pass; makes the mean of identical samples exact.
    double residual = 0.0;
    for (double s : samples) residual += s - e.mean;
    e.mean += residual / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double s : samples) ss += (s - e.mean) * (s - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return e;
}

Estimate estimate_ptf(const Ensemble& ens, const TestFunction& f) {
    std::vector<double> values(ens.n);
    for (std::size_t i = 0; i < ens.n; ++i) values[i] = f(ens.position(i));
    return mean_and_se(values);
}

}  // namespace mfb

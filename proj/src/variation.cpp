#include "mfb/variation.hpp"

#include <algorithm>
#include <cmath>

#include "dynamics.hpp"
#include "mfb/error.hpp"

namespace mfb {

void init_variations(Ensemble& ens, const DirectionMap& phi) {
    ens.variations.assign(ens.n * ens.dim, 0.0);
    for (std::size_t i = 0; i < ens.n; ++i) phi.apply(ens.position(i), ens.variation(i));
}

std::vector<double> variation_interaction(const Ensemble& ens, const KernelSpec& kernel, const TimeGrid& grid,
                                          std::size_t m) {
    PairRequest request;
    request.grad_difference = true;
    return detail::interacting_field(ens, kernel, grid.kernel_time(m), request).difference;
}

void step_variation(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel, const TimeGrid& grid,
                    std::size_t m) {
    detail::require_step(ens, m, grid);
    if (ens.variations.size() != ens.n * ens.dim) {
        throw Error(ErrorCode::invalid_argument, "ensemble carries no variation vectors");
    }
    PairRequest request;
    request.grad_difference = true;
    const InteractionField field = detail::interacting_field(ens, kernel, grid.kernel_time(m), request);
    const double dt = grid.dt(m);
    const std::vector<double> dw = detail::step_increments(ens, m, dt);
    detail::update_variations(ens, coeffs, grid.nodes[m], dt, dw, field, m);
}

void step_jacobian(Ensemble& decoupled, const MeasureFlow& flow, const CoefficientSet& coeffs,
                   const KernelSpec& kernel, std::size_t m, FlowAverage average) {
    const TimeGrid& grid = flow.grid;
    detail::require_step(decoupled, m, grid);
    if (decoupled.jacobians.size() != decoupled.n * decoupled.dim * decoupled.dim) {
        throw Error(ErrorCode::invalid_argument, "ensemble carries no Jacobians");
    }
    InteractionField field;
    if (!kernel.is_zero()) {
        PairRequest request;
        request.grad = true;
        field = detail::flow_field(decoupled, flow.snapshots.at(m), kernel, grid.kernel_time(m), average, request);
    }
    const double dt = grid.dt(m);
    const std::vector<double> dw = detail::step_increments(decoupled, m, dt);
    detail::update_jacobians(decoupled, coeffs, grid.nodes[m], dt, dw, field, m);
}

VariationRun run_variation(Ensemble ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                           const TimeGrid& grid, bool record_flow) {
    if (ens.variations.size() != ens.n * ens.dim) {
        throw Error(ErrorCode::invalid_argument, "ensemble carries no variation vectors");
    }
    VariationRun run;
    run.history.n = ens.n;
    run.history.dim = ens.dim;
    run.history.times = grid.nodes;
    run.history.snapshots.reserve(grid.M + 1);
    InteractingOptions options;
    options.variation = true;
    auto record = [&run](const StepView& view) { run.history.snapshots.push_back(view.state.variations); };
    run.sim = simulate_mv(std::move(ens), coeffs, kernel, grid, record_flow, options, record);
    run.history.snapshots.push_back(run.sim.ensemble.variations);
    return run;
}

MomentReport moment_probe(const VariationHistory& history, double p) {
    MomentReport report;
    report.p = p;
    const std::size_t d = history.dim;
    for (std::size_t m = 0; m < history.snapshots.size(); ++m) {
        const auto& v = history.snapshots[m];
        double sum = 0.0;
        for (std::size_t i = 0; i < history.n; ++i) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) r2 += v[i * d + k] * v[i * d + k];
            sum += std::pow(std::sqrt(r2), p);
        }
        MomentRow row;
        row.t = history.times.at(m);
        row.mean_abs_v_pow_p = history.n > 0 ? sum / static_cast<double>(history.n) : 0.0;
        report.rows.push_back(row);
    }
    const double initial = report.rows.empty() ? 0.0 : report.rows.front().mean_abs_v_pow_p;
    for (auto& row : report.rows) {
        row.ratio_to_initial = initial > 0.0 ? row.mean_abs_v_pow_p / initial : 0.0;
        report.sup_ratio = std::max(report.sup_ratio, row.ratio_to_initial);
    }
    return report;
}

}  // namespace mfb

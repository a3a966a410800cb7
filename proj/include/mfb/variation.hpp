#pragma once

#include <cstddef>
#include <vector>

#include "mfb/simulator.hpp"
#include "mfb/test_function.hpp"

namespace mfb {

/// Sets v^i = phi(X_0^i) on every particle.
void init_variations(Ensemble& ens, const DirectionMap& phi);

/// Euler step of the linearised mean-field dynamics on ens.variations, using the
/// step-m positions and increments. Positions are left untouched, so call this
/// before step_mv for the same m.
void step_variation(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel, const TimeGrid& grid,
                    std::size_t m);

/// Interaction contribution (1/(N-1)) sum_j grad h(X^i - X^j)(v^i - v^j) of step m, N x d.
std::vector<double> variation_interaction(const Ensemble& ens, const KernelSpec& kernel, const TimeGrid& grid,
                                          std::size_t m);

/// Euler step of the decoupled Jacobian J^i along the frozen flow (positions untouched).
void step_jacobian(Ensemble& decoupled, const MeasureFlow& flow, const CoefficientSet& coeffs,
                   const KernelSpec& kernel, std::size_t m, FlowAverage average = FlowAverage::all_particles);

/// Variation vectors at every grid node.
struct VariationHistory {
    std::vector<double> times;
    std::size_t n = 0;
    std::size_t dim = 1;
    std::vector<std::vector<double>> snapshots;
};

struct VariationRun {
    SimulationResult sim;
    VariationHistory history;
};

/// Interacting run with variations evolved alongside; `ens` must carry initial variations.
VariationRun run_variation(Ensemble ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                           const TimeGrid& grid, bool record_flow = false);

struct MomentRow {
    double t = 0.0;
    double mean_abs_v_pow_p = 0.0;
    double ratio_to_initial = 0.0;
};

struct MomentReport {
    double p = 2.0;
    std::vector<MomentRow> rows;
    /// sup_t mean |v_t|^p / mean |v_0|^p; 0 when the initial moment vanishes.
    double sup_ratio = 0.0;
};

MomentReport moment_probe(const VariationHistory& history, double p);

}  // namespace mfb

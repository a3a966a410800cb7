#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfb/coefficients.hpp"
#include "mfb/ensemble.hpp"
#include "mfb/kernel.hpp"
#include "mfb/test_function.hpp"
#include "mfb/time_grid.hpp"

namespace mfb {

/// Empirical approximation of mu_t at every grid node; snapshot m is N x d row-major.
struct MeasureFlow {
    TimeGrid grid;
    std::size_t n = 0;
    std::size_t dim = 1;
    std::vector<std::vector<double>> snapshots;

    bool has_snapshots() const { return !snapshots.empty(); }
};

/// Per-particle interaction quantities at one step, already multiplied by
/// c t^kappa and the empirical normalisation (1/(N-1) interacting, 1/N frozen flow).
struct InteractionField {
    std::vector<double> drift;       // N x d      B^i
    std::vector<double> grad;        // N x d x d  mean grad h(X^i - Y^j)
    std::vector<double> weighted;    // N x d      mean grad h(X^i - Y^j) v^j
    std::vector<double> difference;  // N x d      mean grad h(X^i - Y^j) (v^i - v^j)
};

/// What an observer sees on step m: the pre-update state, the step-m increments
/// and the interaction field evaluated on that state.
struct StepView {
    std::size_t m;
    double t;         // left node
    double dt;
    double kernel_t;  // time used for the kernel prefactor
    const Ensemble& state;
    std::span<const double> increments;  // N x d
    const InteractionField& field;
};

using StepObserver = std::function<void(const StepView&)>;

/// How a frozen flow is averaged in the decoupled drift.
enum class FlowAverage {
    all_particles,       // (1/N) sum over every flow sample
    exclude_same_index,  // (1/(N-1)) sum over j != i, the interacting-system convention
};

struct InteractingOptions {
    bool variation = false;  // evolve ens.variations alongside positions
    bool term2_field = false;  // also provide the weighted gradient sum to observers
};

/// One Euler-Maruyama step of the interacting particle system, in place.
void step_mv(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel, const TimeGrid& grid,
             std::size_t m);

/// Positions and, optionally, variations advanced with one shared pairwise pass.
void advance_interacting(Ensemble& ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                         const TimeGrid& grid, std::size_t m, const InteractingOptions& options,
                         const StepObserver& observer = {});

struct SimulationResult {
    Ensemble ensemble;
    std::optional<MeasureFlow> flow;
};

SimulationResult simulate_mv(const InitialLaw& law, const CoefficientSet& coeffs, const KernelSpec& kernel,
                             const TimeGrid& grid, std::size_t n, std::uint64_t seed, bool record_flow);

/// Runs the interacting system from a prepared ensemble (step 0).
SimulationResult simulate_mv(Ensemble ens, const CoefficientSet& coeffs, const KernelSpec& kernel,
                             const TimeGrid& grid, bool record_flow, const InteractingOptions& options = {},
                             const StepObserver& observer = {});

struct DecoupledOptions {
    FlowAverage average = FlowAverage::all_particles;
    bool jacobian = false;  // evolve ens.jacobians along the decoupled paths
};

/// Decoupled SDE with the measure frozen to `flow`. Starts from x0 (N x d) and draws
/// its increments from streams (seed, i, m).
Ensemble simulate_decoupled(std::span<const double> x0, const MeasureFlow& flow, const CoefficientSet& coeffs,
                            const KernelSpec& kernel, std::uint64_t seed, const DecoupledOptions& options = {},
                            const StepObserver& observer = {});

/// One step of the decoupled SDE (and Jacobian when requested) against flow snapshot m.
void advance_decoupled(Ensemble& ens, const MeasureFlow& flow, const CoefficientSet& coeffs,
                       const KernelSpec& kernel, std::size_t m, const DecoupledOptions& options,
                       const StepObserver& observer = {});

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error (sample std / sqrt N) of per-particle samples.
Estimate mean_and_se(std::span<const double> samples);

/// Monte Carlo estimate of P_t f(mu) from the ensemble.
Estimate estimate_ptf(const Ensemble& ens, const TestFunction& f);

/// Throws NonFinite naming step m if any entry is NaN or infinite.
void require_finite(std::span<const double> values, std::size_t m, const char* what);

}  // namespace mfb

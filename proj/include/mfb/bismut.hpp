#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfb/coefficients.hpp"
#include "mfb/ensemble.hpp"
#include "mfb/kernel.hpp"
#include "mfb/simulator.hpp"
#include "mfb/test_function.hpp"
#include "mfb/time_grid.hpp"

namespace mfb {

enum class BetaKind { linear, smoothstep };

BetaKind parse_beta_kind(std::string_view name);
const char* to_string(BetaKind kind);

struct BetaValue {
    double beta = 0.0;
    double beta_prime = 0.0;
};

/// Time weight with beta(0) = 0, beta(t) = 1:
/// linear s/t, smoothstep 3(s/t)^2 - 2(s/t)^3. Throws OutOfRange unless 0 <= s <= t.
BetaValue beta_weight(BetaKind kind, double t, double s);

/// Per-particle samples of a Monte Carlo term and their summary.
struct TermResult {
    Estimate estimate;
    std::vector<double> samples;
};

/// Accumulates I^i = sum_m beta'(s_m) <zeta(X^i_m) J^i_m phi(X^i_0), dW^i_m> from
/// decoupled steps that carry Jacobians. Only the pre-update state of each step is read.
class JacobianWeight {
public:
    JacobianWeight(const CoefficientSet& coeffs, std::span<const double> x0, const DirectionMap& phi,
                   BetaKind beta, double horizon);

    void operator()(const StepView& view);
    const std::vector<double>& weights() const { return weights_; }

private:
    const CoefficientSet& coeffs_;
    std::size_t dim_;
    std::vector<double> directions_;
    std::vector<double> weights_;
    std::vector<double> constant_zeta_;
    BetaKind beta_;
    double horizon_;
};

/// Accumulates K^i = sum_m <zeta(X^i_m) G^i_m, dW^i_m> with
/// G^i_m = -(1/(N-1)) sum_{j != i} grad h(X^i_m - X^j_m) v^j_m, from interacting
/// steps run with the weighted gradient field enabled.
class MeasureWeight {
public:
    MeasureWeight(const CoefficientSet& coeffs, std::size_t n);

    void operator()(const StepView& view);
    const std::vector<double>& weights() const { return weights_; }

private:
    const CoefficientSet& coeffs_;
    std::vector<double> weights_;
    std::vector<double> constant_zeta_;
};

/// First term: decoupled paths from x0 along the frozen flow, Jacobian flow and
/// beta-weighted stochastic integral; samples f(X_T^{mu,x}) I^i.
TermResult bismut_term1(std::span<const double> x0, const MeasureFlow& flow, const CoefficientSet& coeffs,
                        const KernelSpec& kernel, const TestFunction& f, const DirectionMap& phi, BetaKind beta,
                        std::uint64_t seed, FlowAverage average = FlowAverage::all_particles);

struct Term2Run {
    TermResult term;
    SimulationResult sim;  // final interacting ensemble and its flow (when recorded)
};

/// Second term: interacting run with variations v^i = phi(X_0^i); samples f(X_T) K^i.
Term2Run bismut_term2(Ensemble initial, const CoefficientSet& coeffs, const KernelSpec& kernel,
                      const TimeGrid& grid, const TestFunction& f, const DirectionMap& phi, bool record_flow);

enum class EnsembleMode { single, two };

EnsembleMode parse_ensemble_mode(std::string_view name);
const char* to_string(EnsembleMode mode);

/// Everything needed to run one estimator or oracle on the particle system.
struct Experiment {
    CoefficientSet coeffs;
    KernelSpec kernel;
    InitialLaw law;
    TimeGrid grid;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    TestFunction f;
    DirectionMap phi;
    BetaKind beta = BetaKind::linear;
    EnsembleMode mode = EnsembleMode::single;
};

struct BismutEstimate {
    double term1 = 0.0;
    double term2 = 0.0;
    double total = 0.0;
    double se_term1 = 0.0;
    double se_term2 = 0.0;
    double se_total = 0.0;
    std::size_t n_particles = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
    /// |total| sqrt(t) / sup|f|: the quantity bounded by a constant in the gradient estimate.
    double bound_ratio = 0.0;
};

/// D_phi P_T f(mu) as the sum of the Jacobian-weight and measure-weight terms.
BismutEstimate intrinsic_derivative(const Experiment& experiment);

/// Per-particle totals (term1 + term2 samples) from the last intrinsic_derivative-style run.
BismutEstimate combine_terms(const TermResult& term1, const TermResult& term2, std::size_t n_steps,
                             std::uint64_t seed, double horizon, const TestFunction& f);

}  // namespace mfb

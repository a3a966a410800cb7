#include "mfb/bismut.hpp"

#include <cmath>
#include <string>

#include "mfb/error.hpp"
#include "mfb/parallel.hpp"
#include "mfb/rng.hpp"
#include "mfb/variation.hpp"

namespace mfb {

namespace {

void require_increments(const StepView& view) {
    if (view.increments.size() != view.state.n * view.state.dim) {
        throw Error(ErrorCode::missing_increments, "stochastic integral needs the step increments", view.m);
    }
}

// <zeta w, dw> with zeta d x d row-major.
double zeta_pairing(std::span<const double> zeta, std::span<const double> w, const double* dw, std::size_t d) {
    double acc = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
        double zw = 0.0;
        for (std::size_t c = 0; c < d; ++c) zw += zeta[r * d + c] * w[c];
        acc += zw * dw[r];
    }
    return acc;
}

std::vector<double> constant_zeta_of(const CoefficientSet& coeffs) {
    if (!coeffs.constant_diffusion) return {};
    const std::vector<double> origin(coeffs.dim, 0.0);
    return zeta(coeffs, 0.0, origin);
}

}  // namespace

BetaKind parse_beta_kind(std::string_view name) {
    if (name == "linear") return BetaKind::linear;
    if (name == "smoothstep") return BetaKind::smoothstep;
    throw Error(ErrorCode::invalid_argument, "unknown beta weight '" + std::string(name) + "'");
}

const char* to_string(BetaKind kind) { return kind == BetaKind::linear ? "linear" : "smoothstep"; }

EnsembleMode parse_ensemble_mode(std::string_view name) {
    if (name == "single") return EnsembleMode::single;
    if (name == "two") return EnsembleMode::two;
    throw Error(ErrorCode::invalid_argument, "unknown ensemble mode '" + std::string(name) + "'");
}

const char* to_string(EnsembleMode mode) { return mode == EnsembleMode::single ? "single" : "two"; }

BetaValue beta_weight(BetaKind kind, double t, double s) {
    if (!(t > 0.0) || !(s >= 0.0 && s <= t)) {
        throw Error(ErrorCode::out_of_range, "beta weight needs 0 <= s <= t with t > 0");
    }
    const double u = s / t;
    switch (kind) {
        case BetaKind::linear: return {u, 1.0 / t};
        case BetaKind::smoothstep: return {u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u) / t};
    }
    return {};
}

JacobianWeight::JacobianWeight(const CoefficientSet& coeffs, std::span<const double> x0, const DirectionMap& phi,
                               BetaKind beta, double horizon)
    : coeffs_(coeffs),
      dim_(coeffs.dim),
      directions_(x0.size()),
      weights_(x0.size() / coeffs.dim, 0.0),
      constant_zeta_(constant_zeta_of(coeffs)),
      beta_(beta),
      horizon_(horizon) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        phi.apply(x0.subspan(i * dim_, dim_), std::span<double>(directions_).subspan(i * dim_, dim_));
    }
}

void JacobianWeight::operator()(const StepView& view) {
    require_increments(view);
    const Ensemble& ens = view.state;
    if (ens.jacobians.size() != ens.n * dim_ * dim_ || ens.n != weights_.size()) {
        throw Error(ErrorCode::invalid_argument, "Jacobian weight needs a decoupled run with Jacobians", view.m);
    }
    const double beta_prime = beta_weight(beta_, horizon_, view.t).beta_prime;
    const std::size_t d = dim_;
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> u(d);
        std::vector<double> local_zeta(d * d);
        for (std::size_t i = begin; i < end; ++i) {
            const auto jac = ens.jacobian(i);
            const double* phi = directions_.data() + i * d;
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) acc += jac[r * d + c] * phi[c];
                u[r] = acc;
            }
            std::span<const double> z = constant_zeta_;
            if (z.empty()) {
                local_zeta = zeta(coeffs_, view.t, ens.position(i));
                z = local_zeta;
            }
            weights_[i] += beta_prime * zeta_pairing(z, u, view.increments.data() + i * d, d);
        }
    });
}

MeasureWeight::MeasureWeight(const CoefficientSet& coeffs, std::size_t n)
    : coeffs_(coeffs), weights_(n, 0.0), constant_zeta_(constant_zeta_of(coeffs)) {}

void MeasureWeight::operator()(const StepView& view) {
    require_increments(view);
    const Ensemble& ens = view.state;
    if (ens.n != weights_.size()) throw Error(ErrorCode::invalid_argument, "measure weight size mismatch", view.m);
    if (view.field.weighted.empty()) return;  // no interaction: G vanishes
    const std::size_t d = ens.dim;
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> g(d);
        std::vector<double> local_zeta(d * d);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < d; ++k) g[k] = -view.field.weighted[i * d + k];
            std::span<const double> z = constant_zeta_;
            if (z.empty()) {
                local_zeta = zeta(coeffs_, view.t, ens.position(i));
                z = local_zeta;
            }
            weights_[i] += zeta_pairing(z, g, view.increments.data() + i * d, d);
        }
    });
}

TermResult bismut_term1(std::span<const double> x0, const MeasureFlow& flow, const CoefficientSet& coeffs,
                        const KernelSpec& kernel, const TestFunction& f, const DirectionMap& phi, BetaKind beta,
                        std::uint64_t seed, FlowAverage average) {
    JacobianWeight weight(coeffs, x0, phi, beta, flow.grid.T);
    DecoupledOptions options;
    options.average = average;
    options.jacobian = true;
    const Ensemble final_state =
        simulate_decoupled(x0, flow, coeffs, kernel, seed, options, [&weight](const StepView& v) { weight(v); });
    TermResult result;
    result.samples.resize(final_state.n);
    for (std::size_t i = 0; i < final_state.n; ++i) {
        result.samples[i] = f(final_state.position(i)) * weight.weights()[i];
    }
    result.estimate = mean_and_se(result.samples);
    return result;
}

Term2Run bismut_term2(Ensemble initial, const CoefficientSet& coeffs, const KernelSpec& kernel,
                      const TimeGrid& grid, const TestFunction& f, const DirectionMap& phi, bool record_flow) {
    init_variations(initial, phi);
    MeasureWeight weight(coeffs, initial.n);
    InteractingOptions options;
    options.variation = true;
    options.term2_field = true;
    Term2Run run;
    run.sim = simulate_mv(std::move(initial), coeffs, kernel, grid, record_flow, options,
                          [&weight](const StepView& v) { weight(v); });
    const Ensemble& final_state = run.sim.ensemble;
    run.term.samples.resize(final_state.n);
    for (std::size_t i = 0; i < final_state.n; ++i) {
        run.term.samples[i] = f(final_state.position(i)) * weight.weights()[i];
    }
    run.term.estimate = mean_and_se(run.term.samples);
    return run;
}

BismutEstimate combine_terms(const TermResult& term1, const TermResult& term2, std::size_t n_steps,
                             std::uint64_t seed, double horizon, const TestFunction& f) {
    if (term1.samples.size() != term2.samples.size()) {
        throw Error(ErrorCode::invalid_argument, "term sample counts differ");
    }
    std::vector<double> total(term1.samples.size());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] = term1.samples[i] + term2.samples[i];
    const Estimate tot = mean_and_se(total);
    BismutEstimate out;
    out.term1 = term1.estimate.mean;
    out.term2 = term2.estimate.mean;
    out.total = out.term1 + out.term2;
    out.se_term1 = term1.estimate.std_error;
    out.se_term2 = term2.estimate.std_error;
    out.se_total = tot.std_error;
    out.n_particles = total.size();
    out.n_steps = n_steps;
    out.seed = seed;
    const double sup = f.sup_norm();
    out.bound_ratio = std::isfinite(sup) && sup > 0.0 ? std::abs(out.total) * std::sqrt(horizon) / sup : 0.0;
    return out;
}

BismutEstimate intrinsic_derivative(const Experiment& problem) {
    const auto& coeffs = problem.coeffs;
    Ensemble initial = init_ensemble(problem.law, problem.n, coeffs.dim, problem.seed);
    const std::vector<double> x0 = initial.positions;
    const bool need_flow = !problem.kernel.is_zero();

    Term2Run second = bismut_term2(std::move(initial), coeffs, problem.kernel, problem.grid, problem.f, problem.phi,
                                   need_flow && problem.mode == EnsembleMode::single);

    MeasureFlow flow;
    if (need_flow && problem.mode == EnsembleMode::two) {
        flow = *simulate_mv(problem.law, coeffs, problem.kernel, problem.grid, problem.n,
                            mix_seed(problem.seed, 1), true)
                    .flow;
    } else if (need_flow) {
        flow = std::move(*second.sim.flow);
    } else {
        flow.grid = problem.grid;
        flow.n = problem.n;
        flow.dim = coeffs.dim;
    }
    // With one ensemble, decoupled path i shares its noise with flow sample i; leaving
    // that sample out keeps a singular kernel from acting on a particle's own shadow.
    const FlowAverage average =
        problem.mode == EnsembleMode::single ? FlowAverage::exclude_same_index : FlowAverage::all_particles;
    const TermResult first = bismut_term1(x0, flow, coeffs, problem.kernel, problem.f, problem.phi, problem.beta,
                                          problem.seed, average);
    return combine_terms(first, second.term, problem.grid.M, problem.seed, problem.grid.T, problem.f);
}

}  // namespace mfb

#include "mfb/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynamics.hpp"
#include "mfb/error.hpp"
#include "mfb/parallel.hpp"
#include "mfb/variation.hpp"

namespace mfb {

namespace {

Ensemble perturbed(const Ensemble& base, const DirectionMap& phi, double epsilon) {
    Ensemble out = base;
    std::vector<double> u(base.dim);
    for (std::size_t i = 0; i < base.n; ++i) {
        phi.apply(base.position(i), u);
        auto x = out.position(i);
        for (std::size_t k = 0; k < base.dim; ++k) x[k] += epsilon * u[k];
    }
    return out;
}

void require_epsilons(std::span<const double> epsilons, bool allow_zero) {
    for (double e : epsilons) {
        if (!(allow_zero ? e >= 0.0 : e > 0.0) || !std::isfinite(e)) {
            throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
        }
    }
}

std::size_t nearest_node(const TimeGrid& grid, double t) {
    std::size_t best = 1;
    for (std::size_t m = 1; m <= grid.M; ++m) {
        if (std::abs(grid.nodes[m] - t) < std::abs(grid.nodes[best] - t)) best = m;
    }
    return best;
}

double frobenius(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

}  // namespace

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw Error(ErrorCode::invalid_argument, "log-log fit needs at least 3 points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "log-log fit needs positive data");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    LogLogFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

Estimate fd_intrinsic_derivative(const Experiment& experiment, const DirectionMap& phi, double epsilon) {
    const double eps[] = {epsilon};
    return fd_family(experiment, phi, eps).front().estimate;
}

std::vector<FdRow> fd_family(const Experiment& experiment, const DirectionMap& phi,
                             std::span<const double> epsilons) {
    require_epsilons(epsilons, false);
    const Ensemble start = init_ensemble(experiment.law, experiment.n, experiment.coeffs.dim, experiment.seed);
    const Ensemble base = simulate_mv(start, experiment.coeffs, experiment.kernel, experiment.grid, false).ensemble;
    std::vector<double> f_base(base.n);
    for (std::size_t i = 0; i < base.n; ++i) f_base[i] = experiment.f(base.position(i));

    std::vector<FdRow> rows;
    for (double eps : epsilons) {
        const Ensemble shifted =
            simulate_mv(perturbed(start, phi, eps), experiment.coeffs, experiment.kernel, experiment.grid, false)
                .ensemble;
        std::vector<double> quotient(base.n);
        for (std::size_t i = 0; i < base.n; ++i) quotient[i] = (experiment.f(shifted.position(i)) - f_base[i]) / eps;
        rows.push_back({eps, mean_and_se(quotient)});
    }
    return rows;
}

GirsanovResult girsanov_weight(const Experiment& experiment, const DirectionMap& phi, double epsilon,
                               double moment) {
    const double eps[] = {epsilon};
    require_epsilons(eps, true);
    const auto& coeffs = experiment.coeffs;
    const auto& grid = experiment.grid;
    const Ensemble start = init_ensemble(experiment.law, experiment.n, coeffs.dim, experiment.seed);
    const MeasureFlow flow = *simulate_mv(start, coeffs, experiment.kernel, grid, true).flow;
    const MeasureFlow flow_eps = *simulate_mv(perturbed(start, phi, epsilon), coeffs, experiment.kernel, grid, true).flow;

    const std::size_t n = start.n;
    const std::size_t d = start.dim;
    std::vector<double> log_weight(n, 0.0);
    std::vector<double> constant_zeta;
    if (coeffs.constant_diffusion) constant_zeta = zeta(coeffs, 0.0, std::vector<double>(d, 0.0));

    if (!experiment.kernel.is_zero()) {
        PairRequest request;
        request.value = true;
        for (std::size_t m = 0; m < grid.M; ++m) {
            Ensemble paths = make_ensemble(flow_eps.snapshots[m], d, experiment.seed);
            paths.streams = start.streams;
            const double kt = grid.kernel_time(m);
            const auto own = detail::flow_field(paths, flow.snapshots[m], experiment.kernel, kt,
                                                FlowAverage::exclude_same_index, request);
            const auto other = detail::flow_field(paths, flow_eps.snapshots[m], experiment.kernel, kt,
                                                  FlowAverage::exclude_same_index, request);
            const double dt = grid.dt(m);
            const std::vector<double> dw = detail::step_increments(paths, m, dt);
            parallel_for(n, [&](std::size_t begin, std::size_t end) {
                std::vector<double> diff(d);
                std::vector<double> xi(d);
                std::vector<double> local_zeta;
                for (std::size_t i = begin; i < end; ++i) {
                    for (std::size_t k = 0; k < d; ++k) diff[k] = own.drift[i * d + k] - other.drift[i * d + k];
                    if (constant_zeta.empty()) local_zeta = zeta(coeffs, grid.nodes[m], paths.position(i));
                    const auto& z = constant_zeta.empty() ? local_zeta : constant_zeta;
                    double stochastic = 0.0;
                    double quadratic = 0.0;
                    for (std::size_t r = 0; r < d; ++r) {
                        double acc = 0.0;
                        for (std::size_t c = 0; c < d; ++c) acc += z[r * d + c] * diff[c];
                        xi[r] = acc;
                        stochastic += acc * dw[i * d + r];
                        quadratic += acc * acc;
                    }
                    log_weight[i] += stochastic - 0.5 * quadratic * dt;
                }
            });
        }
    }

    GirsanovResult result;
    result.epsilon = epsilon;
    result.weights.resize(n);
    std::vector<double> deviation(n);
    result.exact = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_weight[i]);
        if (!std::isfinite(w) || !(w > 0.0)) {
            throw Error(ErrorCode::non_finite, "Girsanov weight of path " + std::to_string(i) + " is not finite");
        }
        result.weights[i] = w;
        deviation[i] = std::pow(std::abs(w - 1.0), moment);
        result.exact = result.exact && w == 1.0;
    }
    result.mean_weight = mean_and_se(result.weights);
    result.mean_abs_dev = mean_and_se(deviation);
    return result;
}

GirsanovOrderReport girsanov_order_check(const Experiment& experiment, const DirectionMap& phi,
                                         std::span<const double> epsilons, double moment) {
    if (epsilons.size() < 3) throw Error(ErrorCode::invalid_argument, "order check needs at least 3 epsilons");
    require_epsilons(epsilons, false);
    GirsanovOrderReport report;
    report.moment = moment;
    std::vector<double> xs;
    std::vector<double> ys;
    bool all_exact = true;
    for (double eps : epsilons) {
        GirsanovResult r = girsanov_weight(experiment, phi, eps, moment);
        r.weights.clear();
        r.weights.shrink_to_fit();
        all_exact = all_exact && r.mean_abs_dev.mean == 0.0;
        xs.push_back(eps);
        ys.push_back(r.mean_abs_dev.mean);
        report.rows.push_back(std::move(r));
    }
    report.degenerate = all_exact;
    if (!all_exact) report.slope = fit_loglog(xs, ys).slope;
    return report;
}

ZMode parse_z_mode(std::string_view name) {
    if (name == "paired") return ZMode::paired;
    if (name == "fixed") return ZMode::fixed;
    throw Error(ErrorCode::invalid_argument, "unknown z mode '" + std::string(name) + "'");
}

const char* to_string(ZMode mode) { return mode == ZMode::paired ? "paired" : "fixed"; }

ScalingReport kernel_scaling_probe(const Experiment& experiment, const AssumptionParams& params, ZMode mode,
                                   std::span<const double> probe_times) {
    if (experiment.law.kind == LawKind::dirac || experiment.law.kind == LawKind::two_point) {
        throw Error(ErrorCode::invalid_law, "kernel scaling probe needs an initial law with a density");
    }
    if (!(params.p > 1.0)) throw Error(ErrorCode::invalid_argument, "scaling probe needs p > 1");
    const auto& grid = experiment.grid;
    const std::size_t n = experiment.n;
    const std::size_t d = experiment.coeffs.dim;
    const double q = params.p / (params.p - 1.0);

    const MeasureFlow flow =
        *simulate_mv(experiment.law, experiment.coeffs, experiment.kernel, grid, n, experiment.seed, true).flow;

    ScalingReport report;
    report.mode = mode;
    report.theoretical_exponent = kernel_gradient_exponent(params);

    // value = (mean s)^{1/q}; delta-method error from the SE of mean s.
    auto summarize = [q](std::span<const double> samples) {
        const Estimate e = mean_and_se(samples);
        ScalingRow row;
        row.value = std::pow(e.mean, 1.0 / q);
        row.std_error = e.mean > 0.0 ? row.value / (q * e.mean) * e.std_error : 0.0;
        return row;
    };

    std::vector<double> grad(d * d);
    std::vector<double> z(d);
    std::vector<double> samples(n);
    for (double probe : probe_times) {
        const std::size_t m = nearest_node(grid, probe);
        const double t = grid.nodes[m];
        const auto& snap = flow.snapshots[m];
        ScalingRow row;
        if (mode == ZMode::paired) {
            if (n < 2) throw Error(ErrorCode::invalid_argument, "paired probe needs N >= 2");
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = (i + n / 2) % n;
                for (std::size_t k = 0; k < d; ++k) z[k] = snap[j * d + k] - snap[i * d + k];
                kernel_grad(experiment.kernel, t, z, grad);
                samples[i] = std::pow(frobenius(grad), q);
            }
            row = summarize(samples);
        } else {
            std::vector<double> mean(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < d; ++k) mean[k] += snap[i * d + k] / static_cast<double>(n);
            }
            std::size_t points = 1;
            for (std::size_t k = 0; k < d; ++k) points *= 3;
            for (std::size_t g = 0; g < points; ++g) {
                std::vector<double> centre = mean;
                std::size_t code = g;
                for (std::size_t k = 0; k < d; ++k) {
                    centre[k] += 0.5 * (static_cast<double>(code % 3) - 1.0);
                    code /= 3;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t k = 0; k < d; ++k) z[k] = centre[k] - snap[i * d + k];
                    kernel_grad(experiment.kernel, t, z, grad);
                    samples[i] = std::pow(frobenius(grad), q);
                }
                const ScalingRow candidate = summarize(samples);
                if (g == 0 || candidate.value > row.value) row = candidate;
            }
        }
        row.t = t;
        report.rows.push_back(row);
    }

    std::vector<double> ts;
    std::vector<double> vs;
    for (const auto& row : report.rows) {
        if (row.value > 0.0) {
            ts.push_back(row.t);
            vs.push_back(row.value);
        }
        if (row.t > 0.0) {
            report.envelope_constant =
                std::max(report.envelope_constant, row.value / std::pow(row.t, report.theoretical_exponent));
        }
    }
    if (ts.size() >= 3) report.slope = fit_loglog(ts, vs).slope;
    return report;
}

VarCheckReport fd_variation_check(const Experiment& experiment, const DirectionMap& phi,
                                  std::span<const double> epsilons, double p) {
    require_epsilons(epsilons, false);
    const auto& coeffs = experiment.coeffs;
    const auto& grid = experiment.grid;
    Ensemble start = init_ensemble(experiment.law, experiment.n, coeffs.dim, experiment.seed);
    Ensemble with_variation = start;
    init_variations(with_variation, phi);
    const VariationRun base = run_variation(std::move(with_variation), coeffs, experiment.kernel, grid, true);
    const auto& flow = *base.sim.flow;
    const std::size_t n = start.n;
    const std::size_t d = start.dim;

    VarCheckReport report;
    report.p = p;
    bool all_zero = true;
    for (double eps : epsilons) {
        const MeasureFlow flow_eps =
            *simulate_mv(perturbed(start, phi, eps), coeffs, experiment.kernel, grid, true).flow;
        std::vector<double> sup_error(n, 0.0);
        for (std::size_t m = 0; m <= grid.M; ++m) {
            const auto& x = flow.snapshots[m];
            const auto& xe = flow_eps.snapshots[m];
            const auto& v = base.history.snapshots[m];
            for (std::size_t i = 0; i < n; ++i) {
                double r2 = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double e = (xe[i * d + k] - x[i * d + k]) / eps - v[i * d + k];
                    r2 += e * e;
                }
                sup_error[i] = std::max(sup_error[i], std::pow(std::sqrt(r2), p));
            }
        }
        VarCheckRow row{eps, mean_and_se(sup_error)};
        all_zero = all_zero && row.sup_error_p.mean == 0.0;
        report.rows.push_back(row);
    }
    report.degenerate = all_zero;
    const double floor = std::pow(kVariationRoundingError, p);
    report.at_rounding_level = std::all_of(report.rows.begin(), report.rows.end(),
                                           [floor](const VarCheckRow& r) { return r.sup_error_p.mean <= floor; });
    if (!all_zero && !report.at_rounding_level && report.rows.size() >= 3) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& r : report.rows) {
            xs.push_back(r.epsilon);
            ys.push_back(r.sup_error_p.mean);
        }
        report.order = fit_loglog(xs, ys).slope;
    }
    return report;
}

}  // namespace mfb

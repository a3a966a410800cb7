#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "mfb/error.hpp"
#include "mfb/oracles.hpp"
#include "mfb/variation.hpp"

using namespace mfb;
using namespace mfb::testing;

namespace {

CoefficientSet nonlinear(std::size_t d) {
    DriftFamily drift;
    drift.kind = DriftKind::diagonal;
    drift.amplitude = 0.7;
    DiffusionFamily diffusion;
    diffusion.kind = DiffusionKind::diagonal;
    diffusion.base = 1.0;
    diffusion.amplitude = 0.3;
    return make_coefficients(d, drift, diffusion);
}

DirectionMap affine(std::vector<double> offset, double scale) {
    DirectionMap phi;
    phi.offset = std::move(offset);
    phi.scale = scale;
    return phi;
}

Ensemble with_variations(Ensemble ens, const DirectionMap& phi) {
    init_variations(ens, phi);
    return ens;
}

}  // namespace

TEST_SUITE("variation") {

TEST_CASE("initial variations follow phi") {
    auto e = make_ensemble({1.0, 2.0, -1.0, 0.5}, 2, 1);
    init_variations(e, affine({0.5, 0.0}, 2.0));
    CHECK(e.variations == std::vector<double>{2.5, 4.0, -1.5, 1.0});
}

TEST_CASE("linear drift gives exp(-T)") {
    const auto coeffs = scalar_linear(1, -1.0, 1.0);
    auto e = with_variations(init_ensemble(InitialLaw{LawKind::gaussian, {0.0}, 1.0}, 20, 1, 1), affine({1.0}, 0.0));
    const auto run = run_variation(e, coeffs, KernelSpec{}, make_grid(1.0, 1000));
    for (double v : run.sim.ensemble.variations) CHECK(std::abs(v - std::exp(-1.0)) <= 2e-3);
    CHECK(run.history.snapshots.size() == 1001);
}

TEST_CASE("constant diffusion decouples variations from the noise") {
    const auto coeffs = scalar_linear(2, -0.4, 1.0);
    const std::vector<double> x0{0.1, 0.2, -0.3, 0.4, 1.0, -1.0};
    const auto phi = affine({0.3, -0.2}, 0.5);
    const auto a = run_variation(with_variations(make_ensemble(x0, 2, 1), phi), coeffs, KernelSpec{}, make_grid(1.0, 50));
    const auto b = run_variation(with_variations(make_ensemble(x0, 2, 99), phi), coeffs, KernelSpec{}, make_grid(1.0, 50));
    CHECK(a.sim.ensemble.positions != b.sim.ensemble.positions);
    CHECK(a.sim.ensemble.variations == b.sim.ensemble.variations);
}

TEST_CASE("constant directions cancel the interaction term at every step") {
    // Constant gradients of b and sigma keep every v^j equal along the run.
    const auto coeffs = scalar_linear(2, -0.3, 1.0);
    const auto grid = make_grid(1.0, 30);
    auto e = with_variations(init_ensemble(InitialLaw{LawKind::gaussian, {0.0, 0.0}, 1.0}, 200, 2, 4),
                             affine({0.6, -1.1}, 0.0));
    for (const auto& kernel : {gaussian_kernel(2.0), KernelSpec{KernelKind::coulomb, 1.0, 0.5, 0.5, 0.01}}) {
        auto ens = e;
        for (std::size_t m = 0; m < grid.M; ++m) {
            const auto term = variation_interaction(ens, kernel, grid, m);
            bool all_zero = true;
            for (double x : term) all_zero = all_zero && x == 0.0;
            REQUIRE(all_zero);
            step_variation(ens, coeffs, kernel, grid, m);
            step_mv(ens, coeffs, kernel, grid, m);
        }
        const auto fused = run_variation(e, coeffs, kernel, grid);
        CHECK(fused.sim.ensemble.variations == ens.variations);
        const auto free = run_variation(e, coeffs, KernelSpec{}, grid);
        CHECK(free.sim.ensemble.variations == ens.variations);
    }
}

TEST_CASE("variations are linear in phi") {
    const auto coeffs = nonlinear(2);
    const auto grid = make_grid(0.5, 40);
    const auto kernel = gaussian_kernel(1.0);
    const auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.0, 0.5}, 1.0}, 150, 2, 8);
    const auto phi1 = affine({0.4, 0.1}, 0.8);
    const auto phi2 = affine({-0.2, 0.9}, -0.3);
    DirectionMap sum = phi1;
    sum.offset = {0.2, 1.0};
    sum.scale = 0.5;
    const auto v1 = run_variation(with_variations(start, phi1), coeffs, kernel, grid).history;
    const auto v2 = run_variation(with_variations(start, phi2), coeffs, kernel, grid).history;
    const auto vd = run_variation(with_variations(start, phi1.scaled(2.0)), coeffs, kernel, grid).history;
    const auto vs = run_variation(with_variations(start, sum), coeffs, kernel, grid).history;
    double add_err = 0, scale = 0;
    for (std::size_t m = 0; m < v1.snapshots.size(); ++m) {
        for (std::size_t k = 0; k < v1.snapshots[m].size(); ++k) {
            REQUIRE(vd.snapshots[m][k] == 2.0 * v1.snapshots[m][k]);
            const double s = v1.snapshots[m][k] + v2.snapshots[m][k];
            add_err = std::max(add_err, std::abs(vs.snapshots[m][k] - s));
            scale = std::max(scale, std::abs(s));
        }
    }
    CHECK(add_err <= 1e-10 * scale);
}

TEST_CASE("decoupled Jacobian of a linear drift") {
    const auto coeffs = scalar_linear(1, -1.0, 1.0);
    std::vector<double> dts, errs;
    for (std::size_t M : {250u, 500u, 1000u}) {
        const auto grid = make_grid(1.0, M);
        const auto sys = simulate_mv(InitialLaw{LawKind::dirac, {0.0}}, coeffs, KernelSpec{}, grid, 5, 1, true);
        const auto dec = simulate_decoupled(sys.flow->snapshots[0], *sys.flow, coeffs, KernelSpec{}, 1,
                                            DecoupledOptions{FlowAverage::all_particles, true});
        double err = 0;
        for (double j : dec.jacobians) err = std::max(err, std::abs(j - std::exp(-1.0)));
        dts.push_back(grid.dt(0));
        errs.push_back(err);
    }
    CHECK(errs.back() <= 2e-3);
    CHECK(fit_loglog(dts, errs).slope >= 0.8);
}

TEST_CASE("Jacobians start at the identity") {
    auto e = make_ensemble({1, 2, 3, 4}, 2, 1);
    e.init_jacobians();
    CHECK(e.jacobians == std::vector<double>{1, 0, 0, 1, 1, 0, 0, 1});
}

TEST_CASE("Jacobian matches pathwise finite differences") {
    const auto coeffs = nonlinear(2);
    const auto grid = make_grid(0.5, 100);
    const auto kernel = gaussian_kernel(1.0);
    const auto sys = simulate_mv(InitialLaw{LawKind::gaussian, {0.0, 0.0}, 1.0}, coeffs, kernel, grid, 100, 3, true);
    const auto& x0 = sys.flow->snapshots[0];
    const std::vector<double> v{0.6, -0.8};
    const auto base = simulate_decoupled(x0, *sys.flow, coeffs, kernel, 3, DecoupledOptions{FlowAverage::all_particles, true});
    std::vector<double> eps{1e-2, 5e-3, 2.5e-3}, errs;
    for (double e : eps) {
        auto moved = x0;
        for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += e * v[i % 2];
        const auto pert = simulate_decoupled(moved, *sys.flow, coeffs, kernel, 3);
        double mean = 0;
        for (std::size_t i = 0; i < base.n; ++i) {
            const auto J = base.jacobian(i);
            double r2 = 0;
            for (std::size_t a = 0; a < 2; ++a) {
                const double jv = J[a * 2] * v[0] + J[a * 2 + 1] * v[1];
                const double fd = (pert.position(i)[a] - base.position(i)[a]) / e;
                r2 += (jv - fd) * (jv - fd);
            }
            mean += std::sqrt(r2);
        }
        errs.push_back(mean / base.n);
    }
    CHECK(errs[0] > errs[1]);
    CHECK(errs[1] > errs[2]);
    CHECK(fit_loglog(eps, errs).slope >= 0.8);
}

TEST_CASE("moment probe on a contraction") {
    const auto coeffs = scalar_linear(1, -1.0, 1.0);
    const auto run = run_variation(with_variations(init_ensemble(InitialLaw{LawKind::gaussian, {0.0}, 1.0}, 50, 1, 2),
                                                   affine({1.0}, 0.0)),
                                   coeffs, KernelSpec{}, make_grid(1.0, 100));
    const auto report = moment_probe(run.history, 2.0);
    CHECK(report.rows.size() == 101);
    CHECK(report.rows.front().ratio_to_initial == 1.0);
    for (const auto& row : report.rows) CHECK(row.ratio_to_initial <= 1.0);
    CHECK(report.sup_ratio == 1.0);
    CHECK(report.rows.back().mean_abs_v_pow_p == doctest::Approx(std::exp(-2.0)).epsilon(0.01));
}

TEST_CASE("moment probe with a zero direction") {
    const auto run = run_variation(with_variations(make_ensemble({0.0, 1.0}, 1, 1), affine({0.0}, 0.0)),
                                   scalar_linear(1, -1.0, 1.0), gaussian_kernel(), make_grid(1.0, 10));
    const auto report = moment_probe(run.history, 3.0);
    for (const auto& row : report.rows) {
        CHECK(row.mean_abs_v_pow_p == 0.0);
        CHECK(row.ratio_to_initial == 0.0);
    }
    CHECK(report.sup_ratio == 0.0);
}

TEST_CASE("missing variations are rejected") {
    auto e = make_ensemble({0.0, 1.0}, 1, 1);
    CHECK_THROWS_AS(step_variation(e, scalar_linear(1, 0, 1), KernelSpec{}, make_grid(1.0, 2), 0), Error);
    CHECK_THROWS_AS(run_variation(e, scalar_linear(1, 0, 1), KernelSpec{}, make_grid(1.0, 2)), Error);
}

}

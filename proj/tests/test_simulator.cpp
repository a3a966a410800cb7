#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "mfb/error.hpp"
#include "mfb/oracles.hpp"
#include "mfb/parallel.hpp"
#include "mfb/simulator.hpp"

using namespace mfb;
using namespace mfb::testing;

namespace {

// RK4 reference for x' = x exp(-x^2).
double ode_reference(double x, double T, std::size_t steps) {
    auto f = [](double y) { return y * std::exp(-y * y); };
    const double h = T / steps;
    for (std::size_t i = 0; i < steps; ++i) {
        const double k1 = f(x), k2 = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2), k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
}

struct WorkerGuard {
    ~WorkerGuard() { set_worker_count(0); }
};

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("single particle ignores the kernel") {
    const auto coeffs = scalar_linear(2, -0.3, 1.0);
    const auto grid = make_grid(1.0, 50);
    InitialLaw law{LawKind::gaussian, {0.0, 0.0}, 1.0};
    const auto with = simulate_mv(law, coeffs, gaussian_kernel(2.0), grid, 1, 4, false);
    const auto without = simulate_mv(law, coeffs, KernelSpec{}, grid, 1, 4, false);
    CHECK(with.ensemble.positions == without.ensemble.positions);
}

TEST_CASE("symmetric pair stays symmetric") {
    const auto coeffs = scalar_linear(1, 0.0, 0.0);
    const auto grid = make_grid(2.0, 300);
    const auto res = simulate_mv(make_ensemble({0.7, -0.7}, 1, 1), coeffs, gaussian_kernel(1.0), grid, false);
    CHECK(res.ensemble.positions[0] == -res.ensemble.positions[1]);
    CHECK(res.ensemble.positions[0] != 0.7);
}

TEST_CASE("linear ODE decays like exp(-T)") {
    const auto coeffs = scalar_linear(1, -1.0, 0.0);
    const auto res = simulate_mv(InitialLaw{LawKind::dirac, {1.0}}, coeffs, KernelSpec{}, make_grid(1.0, 1000), 3, 1,
                                 false);
    for (double x : res.ensemble.positions) CHECK(std::abs(x - std::exp(-1.0)) <= 2e-3);
}

TEST_CASE("Brownian motion has variance T") {
    const auto coeffs = scalar_linear(1, 0.0, 1.0);
    const auto res = simulate_mv(InitialLaw{LawKind::dirac, {0.0}}, coeffs, KernelSpec{}, make_grid(1.0, 20), 10000,
                                 3, false);
    const auto& x = res.ensemble.positions;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (x.size() - 1);
    CHECK(std::abs(var - 1.0) <= 0.02 * 2.5);  // 0.02 is ~1.4 sample-variance SE at N = 1e4
    CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("fixed seed reproduces the flow") {
    const auto coeffs = scalar_linear(2, -0.5, 1.0);
    InitialLaw law{LawKind::gaussian, {0.0, 1.0}, 0.5};
    const auto grid = make_grid(1.0, 20);
    const auto a = simulate_mv(law, coeffs, gaussian_kernel(), grid, 100, 8, true);
    const auto b = simulate_mv(law, coeffs, gaussian_kernel(), grid, 100, 8, true);
    REQUIRE(a.flow.has_value());
    CHECK(a.flow->snapshots.size() == grid.M + 1);
    CHECK(a.flow->snapshots == b.flow->snapshots);
}

TEST_CASE("fourth moment stays bounded on the benchmark") {
    const auto coeffs = scalar_linear(1, 0.0, 1.0);
    const auto grid = make_grid(0.5, 200);
    const auto res = simulate_mv(InitialLaw{LawKind::dirac, {0.5}}, coeffs, gaussian_kernel(), grid, 2000, 1, true);
    std::vector<double> m4;
    for (const auto& snap : res.flow->snapshots) {
        double s = 0;
        for (double x : snap) s += x * x * x * x;
        m4.push_back(s / snap.size());
    }
    auto sorted = m4;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double peak = sorted.back();
    CHECK(std::isfinite(peak));
    CHECK(peak < 10.0 * median);
}

TEST_CASE("translation equivariance") {
    const auto coeffs = scalar_linear(2, 0.0, 0.8);
    const auto grid = make_grid(1.0, 40);
    const auto base = init_ensemble(InitialLaw{LawKind::gaussian, {0.0, 0.0}, 1.0}, 200, 2, 5);
    auto shifted = base;
    const double c[2] = {3.0, -1.5};
    for (std::size_t i = 0; i < shifted.n; ++i) {
        shifted.position(i)[0] += c[0];
        shifted.position(i)[1] += c[1];
    }
    for (const auto& kernel : {gaussian_kernel(1.0), KernelSpec{KernelKind::coulomb, 0.5, 0.0, 0.5, 0.05}}) {
        const auto a = simulate_mv(base, coeffs, kernel, grid, false).ensemble;
        const auto b = simulate_mv(shifted, coeffs, kernel, grid, false).ensemble;
        double err = 0;
        for (std::size_t i = 0; i < a.n; ++i) {
            err = std::max(err, std::abs(b.position(i)[0] - a.position(i)[0] - c[0]));
            err = std::max(err, std::abs(b.position(i)[1] - a.position(i)[1] - c[1]));
        }
        // Differences of shifted coordinates round differently, so equality holds to rounding only.
        CHECK(err <= 1e-12);
    }
}

TEST_CASE("odd kernels conserve interaction momentum") {
    const auto coeffs = scalar_linear(2, 0.0, 1.0);
    const auto grid = make_grid(1.0, 50);
    const auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.0, 0.0}, 1.0}, 300, 2, 6);
    for (const auto& kernel : {gaussian_kernel(2.0), KernelSpec{KernelKind::coulomb, 1.0, 0.5, 0.5, 0.01}}) {
        double worst = 0;
        simulate_mv(start, coeffs, kernel, grid, false, {}, [&](const StepView& view) {
            for (std::size_t k = 0; k < 2; ++k) {
                double s = 0;
                for (std::size_t i = 0; i < view.state.n; ++i) s += view.field.drift[i * 2 + k];
                worst = std::max(worst, std::abs(s));
            }
        });
        CHECK(worst <= 1e-10 * start.n);
    }
}

TEST_CASE("decoupled run on its own flow reproduces the system") {
    const auto coeffs = scalar_linear(1, -0.2, 1.0);
    const auto grid = make_grid(0.5, 60);
    const auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.5}, 0.3}, 150, 1, 12);
    for (const auto& kernel : {gaussian_kernel(0.5), KernelSpec{KernelKind::coulomb, 0.3, 0.5, 0.5, 0.05}}) {
        const auto sys = simulate_mv(start, coeffs, kernel, grid, true);
        const auto dec = simulate_decoupled(start.positions, *sys.flow, coeffs, kernel, start.seed,
                                            DecoupledOptions{FlowAverage::exclude_same_index});
        CHECK(dec.positions == sys.ensemble.positions);
        // Averaging over every flow sample includes the self term: close but not identical.
        const auto all = simulate_decoupled(start.positions, *sys.flow, coeffs, kernel, start.seed);
        CHECK(all.positions != sys.ensemble.positions);
        CHECK(max_abs_diff(all.positions, sys.ensemble.positions) < 0.05);
    }
}

TEST_CASE("decoupled run with a zero kernel is the kernel-free system") {
    const auto coeffs = scalar_linear(1, -1.0, 1.0);
    const auto grid = make_grid(1.0, 30);
    const auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.0}, 1.0}, 50, 1, 2);
    const auto sys = simulate_mv(start, coeffs, KernelSpec{}, grid, true);
    const auto dec = simulate_decoupled(start.positions, *sys.flow, coeffs, KernelSpec{}, start.seed);
    CHECK(dec.positions == sys.ensemble.positions);
    CHECK(simulate_decoupled(start.positions, *sys.flow, coeffs, KernelSpec{}, start.seed).positions ==
          dec.positions);
}

TEST_CASE("decoupled drift against a point mass is a one-body ODE") {
    const auto coeffs = scalar_linear(1, 0.0, 0.0);
    const auto grid = make_grid(1.0, 1000);
    MeasureFlow flow;
    flow.grid = grid;
    flow.n = 4;
    flow.dim = 1;
    flow.snapshots.assign(grid.M + 1, std::vector<double>(4, 0.0));
    const auto dec = simulate_decoupled(std::vector<double>{1.0}, flow, coeffs, gaussian_kernel(1.0), 1);
    CHECK(std::abs(dec.positions[0] - ode_reference(1.0, 1.0, 100000)) <= 2e-3);
}

TEST_CASE("results do not depend on the worker count") {
    WorkerGuard guard;
    const auto coeffs = scalar_linear(2, -0.1, 1.0);
    const auto grid = make_grid(0.5, 20);
    const auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.0, 0.0}, 1.0}, 500, 2, 21);
    const KernelSpec kernel{KernelKind::coulomb, 1.0, 0.5, 0.5, 0.01};
    std::vector<std::vector<double>> results;
    for (std::size_t w : {1u, 2u, 3u, 7u}) {
        set_worker_count(w);
        results.push_back(simulate_mv(start, coeffs, kernel, grid, false).ensemble.positions);
    }
    for (const auto& r : results) CHECK(r == results.front());
}

TEST_CASE("relabelling streams is distributionally neutral") {
    const auto coeffs = scalar_linear(1, 0.0, 1.0);
    const auto grid = make_grid(0.5, 50);
    const TestFunction f;
    auto start = init_ensemble(InitialLaw{LawKind::gaussian, {0.5}, 0.5}, 2000, 1, 31);
    const auto a = estimate_ptf(simulate_mv(start, coeffs, gaussian_kernel(), grid, false).ensemble, f);
    std::reverse(start.streams.begin(), start.streams.end());
    std::rotate(start.streams.begin(), start.streams.begin() + 7, start.streams.end());
    const auto b = estimate_ptf(simulate_mv(start, coeffs, gaussian_kernel(), grid, false).ensemble, f);
    CHECK(a.mean != b.mean);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("weak error is first order") {
    // sigma is small so that Monte Carlo noise sits well below the Euler bias.
    const auto coeffs = scalar_linear(1, -1.0, 0.01);
    std::vector<double> dts, errs;
    for (std::size_t M : {100u, 200u, 400u}) {
        const auto res = simulate_mv(InitialLaw{LawKind::dirac, {1.0}}, coeffs, KernelSpec{}, make_grid(1.0, M),
                                     20000, 3, false);
        const auto est = estimate_ptf(res.ensemble, TestFunction{TestFunctionKind::coordinate});
        dts.push_back(1.0 / M);
        errs.push_back(std::abs(est.mean - std::exp(-1.0)));
    }
    CHECK(errs[0] <= 2.0 * dts[0]);
    CHECK(fit_loglog(dts, errs).slope >= 0.8);
}

TEST_CASE("estimate_ptf examples") {
    TestFunction one;
    one.direction = {0.0};
    one.phase = std::acos(0.0);
    const auto e = make_ensemble({0.3, -2.0, 5.0}, 1, 1);
    const auto c = estimate_ptf(e, one);
    CHECK(c.mean == 1.0);
    CHECK(c.std_error == 0.0);

    const auto coeffs = scalar_linear(1, 0.0, 0.0);
    const auto still = simulate_mv(InitialLaw{LawKind::dirac, {0.4}}, coeffs, KernelSpec{}, make_grid(1.0, 10), 50,
                                   1, false);
    const auto s = estimate_ptf(still.ensemble, TestFunction{});
    CHECK(s.mean == std::sin(0.4));
    CHECK(s.std_error == 0.0);

    const auto bm = simulate_mv(InitialLaw{LawKind::dirac, {0.0}}, scalar_linear(1, 0.0, 1.0), KernelSpec{},
                                make_grid(1.0, 1), 100000, 9, false);
    const auto w = estimate_ptf(bm.ensemble, TestFunction{});
    CHECK(std::abs(w.mean) <= 3.0 * w.std_error);
}

TEST_CASE("coincident particles under an exact coulomb kernel") {
    const auto coeffs = scalar_linear(2, 0.0, 1.0);
    try {
        simulate_mv(InitialLaw{LawKind::dirac, {0.0, 0.0}}, coeffs, KernelSpec{KernelKind::coulomb, 1.0, 0.5, 0.5, 0.0},
                    make_grid(1.0, 5), 3, 1, false);
        FAIL("expected SingularEvaluation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_evaluation);
    }
}

TEST_CASE("non-finite state names the step") {
    auto coeffs = scalar_linear(1, 0.0, 1.0);
    coeffs.drift = [](double t, std::span<const double>, std::span<double> out) {
        out[0] = t >= 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    try {
        simulate_mv(InitialLaw{LawKind::dirac, {0.0}}, coeffs, KernelSpec{}, make_grid(1.0, 10), 4, 1, false);
        FAIL("expected NonFinite");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite);
        REQUIRE(e.step().has_value());
        CHECK(*e.step() == 5);
    }
    const std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(require_finite(bad, 3, "x"), Error);
}

TEST_CASE("mean and standard error") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto e = mean_and_se(xs);
    CHECK(e.mean == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
}

}

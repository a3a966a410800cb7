#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfb/error.hpp"
#include "mfb/kernel.hpp"

using namespace mfb;

namespace {

KernelSpec coulomb(double c, double kappa, double beta, double delta) {
    return {KernelKind::coulomb, c, kappa, beta, delta};
}

KernelSpec gaussian(double c, double kappa) { return {KernelKind::gaussian_linear, c, kappa, 0.0, 0.0}; }

// Direct formulas, written independently of the library.
std::vector<double> coulomb_ref(double c, double kappa, double beta, double delta, double t,
                                const std::vector<double>& z) {
    double r2 = delta * delta;
    for (double v : z) r2 += v * v;
    const double s = c * std::pow(t, kappa) / std::pow(std::sqrt(r2), beta + 1.0);
    std::vector<double> out;
    for (double v : z) out.push_back(s * v);
    return out;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("coulomb at unit separation") {
    const auto h = kernel_eval(coulomb(1, 0, 0.5, 0), 1.0, std::vector<double>{1, 0});
    CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(h[1] == 0.0);
}

TEST_CASE("regularised coulomb vanishes at the origin") {
    const auto h = kernel_eval(coulomb(1, 0.5, 0.5, 0.1), 0.25, std::vector<double>{0, 0});
    CHECK(h[0] == 0.0);
    CHECK(h[1] == 0.0);
}

TEST_CASE("gaussian kernel value") {
    const auto h = kernel_eval(gaussian(1, 0), 1.0, std::vector<double>{1, 0});
    CHECK(std::abs(h[0] - 0.367879) <= 1e-6);
    CHECK(h[1] == 0.0);
}

TEST_CASE("coulomb gradient at unit separation") {
    const auto g = kernel_grad(coulomb(1, 0, 0.5, 0), 1.0, std::vector<double>{1, 0});
    CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
    CHECK(g[3] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian gradient at the origin is the identity") {
    const auto g = kernel_grad(gaussian(1, 0), 1.0, std::vector<double>{0, 0});
    CHECK(g == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("zero kernel evaluates to zero") {
    KernelSpec zero;
    const auto h = kernel_eval(zero, 0.7, std::vector<double>{0.3, -2.0, 1.0});
    const auto g = kernel_grad(zero, 0.7, std::vector<double>{0.3, -2.0, 1.0});
    for (double v : h) CHECK(v == 0.0);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("exact coulomb at zero separation is an error") {
    CHECK_THROWS_AS(kernel_eval(coulomb(1, 0, 0.5, 0), 1.0, std::vector<double>{0, 0}), Error);
    try {
        kernel_grad(coulomb(1, 0, 0.5, 0), 1.0, std::vector<double>{0, 0});
        FAIL("expected SingularEvaluation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_evaluation);
    }
}

TEST_CASE("non-positive time is out of range") {
    try {
        kernel_eval(gaussian(1, 0.5), 0.0, std::vector<double>{1.0});
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::out_of_range);
    }
}

TEST_CASE("overflowing amplitude is reported as non-finite") {
    try {
        kernel_eval(coulomb(1e308, 0, 0.5, 0), 1.0, std::vector<double>{1e-10, 0});
        FAIL("expected NonFinite");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(coulomb(1, -0.1, 0.5, 0).check(), Error);
    CHECK_THROWS_AS(coulomb(1, 0, 1.0, 0).check(), Error);
    CHECK_THROWS_AS(coulomb(1, 0, 0.5, -1).check(), Error);
    CHECK_NOTHROW(coulomb(1, 0.5, 0.5, 0.1).check());
}

TEST_CASE("values match the direct formula") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> z{normal(rng), normal(rng), normal(rng)};
        const auto h = kernel_eval(coulomb(1.7, 0.3, 0.4, 0.05), 0.6, z);
        const auto ref = coulomb_ref(1.7, 0.3, 0.4, 0.05, 0.6, z);
        for (int k = 0; k < 3; ++k) CHECK(h[k] == doctest::Approx(ref[k]).epsilon(1e-13));
    }
}

TEST_CASE("odd symmetry is exact") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    const KernelSpec specs[] = {coulomb(1.3, 0.5, 0.5, 0.01), coulomb(1, 0, 0.9, 0), gaussian(0.5, 0.2)};
    for (const auto& spec : specs) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> z{normal(rng), normal(rng)};
            std::vector<double> mz{-z[0], -z[1]};
            const auto a = kernel_eval(spec, 0.37, z);
            const auto b = kernel_eval(spec, 0.37, mz);
            CHECK(a[0] == -b[0]);
            CHECK(a[1] == -b[1]);
        }
    }
}

TEST_CASE("time scaling factors out") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        KernelSpec spec = trial % 2 ? coulomb(1.1, u(rng), 0.5, 0.02) : gaussian(0.8, u(rng));
        KernelSpec flat = spec;
        flat.kappa = 0.0;
        const double t = u(rng);
        std::vector<double> z{u(rng) - 1.5, u(rng) - 1.5};
        const auto a = kernel_eval(spec, t, z);
        const auto b = kernel_eval(flat, 1.0, z);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(a[k] - std::pow(t, spec.kappa) * b[k]) <= 1e-12 * std::abs(a[k]));
        }
    }
}

TEST_CASE("gradient matches central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> radius(0.1, 10.0);
    std::normal_distribution<double> normal;
    const KernelSpec specs[] = {coulomb(1.0, 0.5, 0.5, 0.0), coulomb(2.0, 0.0, 0.3, 0.1), gaussian(0.5, 0.0)};
    const double eps = 1e-5;
    for (const auto& spec : specs) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> z{normal(rng), normal(rng)};
            const double scale = radius(rng) / std::hypot(z[0], z[1]);
            for (double& v : z) v *= scale;
            const auto g = kernel_grad(spec, 0.8, z);
            double norm = 0.0;
            for (double v : g) norm = std::max(norm, std::abs(v));
            for (int j = 0; j < 2; ++j) {
                auto zp = z;
                auto zm = z;
                zp[j] += eps;
                zm[j] -= eps;
                const auto hp = kernel_eval(spec, 0.8, zp);
                const auto hm = kernel_eval(spec, 0.8, zm);
                for (int i = 0; i < 2; ++i) {
                    const double fd = (hp[i] - hm[i]) / (2 * eps);
                    CHECK(std::abs(fd - g[i * 2 + j]) <= 1e-4 * std::max(norm, 1e-300));
                }
            }
        }
    }
}

TEST_CASE("closed-form coulomb gradient") {
    // d_j h_i = c t^kappa [delta_ij r^-(b+1) - (b+1) z_i z_j r^-(b+3)]
    const double c = 1.5, kappa = 0.25, b = 0.6, delta = 0.2, t = 0.4;
    const std::vector<double> z{0.3, -0.7};
    const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + delta * delta);
    const auto g = kernel_grad(coulomb(c, kappa, b, delta), t, z);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double ref = c * std::pow(t, kappa) *
                               ((i == j ? std::pow(r, -(b + 1)) : 0.0) - (b + 1) * z[i] * z[j] * std::pow(r, -(b + 3)));
            CHECK(g[i * 2 + j] == doctest::Approx(ref).epsilon(1e-13));
        }
    }
}

}

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfb/coefficients.hpp"
#include "mfb/error.hpp"

using namespace mfb;

namespace {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t d,
                           bool transpose_b = false) {
    std::vector<double> out(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) out[i * d + j] += a[i * d + k] * (transpose_b ? b[j * d + k] : b[k * d + j]);
    return out;
}

double dist_to_identity(const std::vector<double>& m, std::size_t d) {
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(m[i * d + j] - (i == j ? 1.0 : 0.0)));
    return worst;
}

CoefficientSet constant_sigma(std::size_t d, std::vector<double> sigma) {
    DiffusionFamily diff;
    diff.matrix = std::move(sigma);
    return make_coefficients(d, DriftFamily{}, diff);
}

}  // namespace

TEST_SUITE("coefficients") {

TEST_CASE("zeta of the identity") {
    const auto z = zeta(constant_sigma(2, {1, 0, 0, 1}), 0.0, std::vector<double>{0.3, 0.1});
    CHECK(dist_to_identity(z, 2) <= 1e-15);
}

TEST_CASE("zeta of a scaled scalar") {
    const auto z = zeta(constant_sigma(1, {2}), 0.0, std::vector<double>{0.0});
    CHECK(z[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zeta of a diagonal matrix") {
    const auto z = zeta(constant_sigma(2, {1, 0, 0, 2}), 0.0, std::vector<double>{0, 0});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(std::abs(z[1]) <= 1e-15);
    CHECK(std::abs(z[2]) <= 1e-15);
    CHECK(z[3] == doctest::Approx(0.5));
}

TEST_CASE("zeta inverts sigma") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal;
    for (std::size_t d : {1u, 2u, 3u, 4u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> s(d * d);
            for (auto& v : s) v = normal(rng);
            for (std::size_t i = 0; i < d; ++i) s[i * d + i] += 3.0;
            std::vector<double> sym = s;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) sym[i * d + j] = 0.5 * (s[i * d + j] + s[j * d + i]);

            std::vector<double> z(d * d);
            zeta_of(s, d, z);
            CHECK(dist_to_identity(matmul(z, s, d), d) <= 1e-10);

            // For symmetric sigma the product with sigma^* is the identity as well.
            zeta_of(sym, d, z);
            CHECK(dist_to_identity(matmul(z, sym, d, true), d) <= 1e-10);
        }
    }
}

TEST_CASE("singular diffusion is rejected") {
    std::vector<double> z(4);
    try {
        zeta_of(std::vector<double>{1, 2, 2, 4}, 2, z);
        FAIL("expected SingularDiffusion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_diffusion);
    }
    CHECK_THROWS_AS(zeta_of(std::vector<double>{1, 0, 0, 1e-7}, 2, z), Error);
    CHECK_NOTHROW(zeta_of(std::vector<double>{1, 0, 0, 1e-5}, 2, z));
    CHECK_THROWS_AS(constant_sigma(2, {1, 1, 1, 1}), Error);

    DiffusionFamily diag{DiffusionKind::diagonal, {}, 1.0, 1.0};
    CHECK_THROWS_AS(make_coefficients(1, DriftFamily{}, diag), Error);
}

TEST_CASE("shape mismatches are invalid arguments") {
    DriftFamily lin{DriftKind::linear, {}, {1, 2, 3}, 0.0};
    CHECK_THROWS_AS(make_coefficients(2, lin, DiffusionFamily{}), Error);
    CHECK_THROWS_AS(make_coefficients(0, DriftFamily{}, DiffusionFamily{}), Error);
}

TEST_CASE("drift Jacobians match central differences") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    const std::size_t d = 3;
    const DriftFamily families[] = {
        {DriftKind::zero, {}, {}, 0.0},
        {DriftKind::constant, {1, -2, 0.5}, {}, 0.0},
        {DriftKind::linear, {0.1, 0.2, 0.3}, {-1, 0.5, 0, 0.2, -2, 0.1, 0, 0.3, -0.5}, 0.0},
        {DriftKind::diagonal, {}, {}, 1.7},
    };
    for (const auto& family : families) {
        const auto c = make_coefficients(d, family, DiffusionFamily{});
        for (int trial = 0; trial < 25; ++trial) {
            const double t = std::abs(normal(rng));
            std::vector<double> x{normal(rng), normal(rng), normal(rng)};
            std::vector<double> jac(d * d);
            c.drift_jacobian(t, x, jac);
            const double eps = 1e-5;
            for (std::size_t j = 0; j < d; ++j) {
                auto xp = x, xm = x;
                xp[j] += eps;
                xm[j] -= eps;
                std::vector<double> bp(d), bm(d);
                c.drift(t, xp, bp);
                c.drift(t, xm, bm);
                for (std::size_t i = 0; i < d; ++i) {
                    const double fd = (bp[i] - bm[i]) / (2 * eps);
                    const double exact = jac[i * d + j];
                    CHECK(std::abs(fd - exact) <= 1e-5 * std::max(1.0, std::abs(exact)));
                }
            }
        }
    }
}

TEST_CASE("diffusion directional derivative matches central differences") {
    const std::size_t d = 2;
    DiffusionFamily diag{DiffusionKind::diagonal, {}, 2.0, 0.7};
    const auto c = make_coefficients(d, DriftFamily{}, diag);
    CHECK_FALSE(c.constant_diffusion);
    const std::vector<double> x{0.4, -1.3};
    const std::vector<double> v{0.8, 0.25};
    std::vector<double> dsig(d * d), sp(d * d), sm(d * d);
    c.diffusion_jacobian(0.2, x, v, dsig);
    const double eps = 1e-6;
    const std::vector<double> xp{x[0] + eps * v[0], x[1] + eps * v[1]};
    const std::vector<double> xm{x[0] - eps * v[0], x[1] - eps * v[1]};
    c.diffusion(0.2, xp, sp);
    c.diffusion(0.2, xm, sm);
    for (std::size_t k = 0; k < d * d; ++k) CHECK(std::abs((sp[k] - sm[k]) / (2 * eps) - dsig[k]) <= 1e-8);
}

TEST_CASE("constant diffusion has zero derivative") {
    const auto c = constant_sigma(2, {2, 0.5, 0, 1});
    CHECK(c.constant_diffusion);
    std::vector<double> out(4, 1.0);
    c.diffusion_jacobian(0.0, std::vector<double>{1, 2}, std::vector<double>{3, 4}, out);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("family names round-trip") {
    for (auto k : {DriftKind::zero, DriftKind::constant, DriftKind::linear, DriftKind::diagonal})
        CHECK(parse_drift_kind(to_string(k)) == k);
    for (auto k : {DiffusionKind::constant, DiffusionKind::diagonal}) CHECK(parse_diffusion_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_drift_kind("quadratic"), Error);
}

}

#include "mfb/coefficients.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mfb/error.hpp"

namespace mfb {

namespace {

constexpr double kMaxCondition = 1e12;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> identity(std::size_t d) {
    std::vector<double> m(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
    return m;
}

void require_size(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw Error(ErrorCode::invalid_argument,
                    std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
    }
}

}  // namespace

DriftKind parse_drift_kind(std::string_view name) {
    if (name == "zero") return DriftKind::zero;
    if (name == "constant") return DriftKind::constant;
    if (name == "linear") return DriftKind::linear;
    if (name == "diagonal") return DriftKind::diagonal;
    throw Error(ErrorCode::invalid_argument, "unknown drift family '" + std::string(name) + "'");
}

DiffusionKind parse_diffusion_kind(std::string_view name) {
    if (name == "constant") return DiffusionKind::constant;
    if (name == "diagonal") return DiffusionKind::diagonal;
    throw Error(ErrorCode::invalid_argument, "unknown diffusion family '" + std::string(name) + "'");
}

const char* to_string(DriftKind kind) {
    switch (kind) {
        case DriftKind::zero: return "zero";
        case DriftKind::constant: return "constant";
        case DriftKind::linear: return "linear";
        case DriftKind::diagonal: return "diagonal";
    }
    return "zero";
}

const char* to_string(DiffusionKind kind) {
    switch (kind) {
        case DiffusionKind::constant: return "constant";
        case DiffusionKind::diagonal: return "diagonal";
    }
    return "constant";
}

void zeta_of(std::span<const double> sigma, std::size_t dim, std::span<double> out) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::Map<const RowMatrix> s(sigma.data(), d, d);
    const Eigen::MatrixXd a = s * s.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smallest = sv(d - 1);
    if (!(smallest > 0.0) || sv(0) / smallest > kMaxCondition || !std::isfinite(sv(0))) {
        throw Error(ErrorCode::singular_diffusion, "sigma sigma^* is not invertible (condition number above 1e12)");
    }
    // sigma^* a^{-1} = sigma^{-1}; coincides with sigma a^{-1} for symmetric sigma.
    Eigen::Map<RowMatrix> z(out.data(), d, d);
    z = s.transpose() * a.inverse();
}

std::vector<double> zeta(const CoefficientSet& coeffs, double t, std::span<const double> x) {
    const std::size_t d = coeffs.dim;
    std::vector<double> sigma(d * d);
    coeffs.diffusion(t, x, sigma);
    std::vector<double> out(d * d);
    zeta_of(sigma, d, out);
    return out;
}

CoefficientSet make_coefficients(std::size_t dim, const DriftFamily& drift, const DiffusionFamily& diffusion) {
    if (dim == 0) throw Error(ErrorCode::invalid_argument, "dimension must be >= 1");
    const std::size_t d = dim;
    CoefficientSet c;
    c.dim = d;

    switch (drift.kind) {
        case DriftKind::zero:
            c.drift = [](double, std::span<const double>, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
            };
            c.drift_jacobian = c.drift;
            break;
        case DriftKind::constant: {
            std::vector<double> offset = drift.offset.empty() ? std::vector<double>(d, 0.0) : drift.offset;
            require_size(offset, d, "drift offset");
            c.drift = [offset](double, std::span<const double>, std::span<double> out) {
                std::copy(offset.begin(), offset.end(), out.begin());
            };
            c.drift_jacobian = [](double, std::span<const double>, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
            };
            break;
        }
        case DriftKind::linear: {
            std::vector<double> a = drift.matrix.empty() ? identity(d) : drift.matrix;
            std::vector<double> offset = drift.offset.empty() ? std::vector<double>(d, 0.0) : drift.offset;
            require_size(a, d * d, "drift matrix");
            require_size(offset, d, "drift offset");
            c.drift = [a, offset, d](double, std::span<const double> x, std::span<double> out) {
                for (std::size_t i = 0; i < d; ++i) {
                    double acc = offset[i];
                    for (std::size_t j = 0; j < d; ++j) acc += a[i * d + j] * x[j];
                    out[i] = acc;
                }
            };
            c.drift_jacobian = [a](double, std::span<const double>, std::span<double> out) {
                std::copy(a.begin(), a.end(), out.begin());
            };
            break;
        }
        case DriftKind::diagonal: {
            const double amp = drift.amplitude;
            c.drift = [amp](double, std::span<const double> x, std::span<double> out) {
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = amp * std::sin(x[i]);
            };
            c.drift_jacobian = [amp, d](double, std::span<const double> x, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i) out[i * d + i] = amp * std::cos(x[i]);
            };
            break;
        }
    }

    switch (diffusion.kind) {
        case DiffusionKind::constant: {
            std::vector<double> s = diffusion.matrix.empty() ? identity(d) : diffusion.matrix;
            require_size(s, d * d, "diffusion matrix");
            std::vector<double> probe(d * d);
            zeta_of(s, d, probe);  // rejects singular sigma up front
            c.diffusion = [s](double, std::span<const double>, std::span<double> out) {
                std::copy(s.begin(), s.end(), out.begin());
            };
            c.diffusion_jacobian = [](double, std::span<const double>, std::span<const double>, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
            };
            c.constant_diffusion = true;
            break;
        }
        case DiffusionKind::diagonal: {
            const double base = diffusion.base;
            const double amp = diffusion.amplitude;
            if (!(base > std::abs(amp))) {
                throw Error(ErrorCode::singular_diffusion,
                            "diagonal diffusion needs base > |amplitude| to stay invertible");
            }
            c.diffusion = [base, amp, d](double, std::span<const double> x, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i) out[i * d + i] = base + amp * std::sin(x[i]);
            };
            c.diffusion_jacobian = [amp, d](double, std::span<const double> x, std::span<const double> v,
                                            std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i) out[i * d + i] = amp * std::cos(x[i]) * v[i];
            };
            c.constant_diffusion = amp == 0.0;
            break;
        }
    }
    return c;
}

}  // namespace mfb

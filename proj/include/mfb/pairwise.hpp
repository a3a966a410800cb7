#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mfb/kernel.hpp"

namespace mfb {

/// Structure-of-arrays point set: coordinate k of point j lives at coords[k * n + j].
struct PointCloud {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> coords;

    static PointCloud from_rows(std::span<const double> rows, std::size_t dim);
    void assign_rows(std::span<const double> rows, std::size_t dim);
    double at(std::size_t j, std::size_t k) const { return coords[k * n + j]; }
};

/// Which sums pair_sums accumulates. With g the spatial kernel (h_t = c t^kappa g):
///   value            sum_j g(x - y_j)
///   grad             sum_j grad g(x - y_j)                      (d x d row-major)
///   grad_weighted    sum_j grad g(x - y_j) w_j
///   grad_difference  sum_j grad g(x - y_j) (w_self - w_j)
/// The difference form is exactly zero whenever every w_j equals w_self.
struct PairRequest {
    bool value = false;
    bool grad = false;
    bool grad_weighted = false;
    bool grad_difference = false;
};

struct PairOutput {
    std::span<double> value;
    std::span<double> grad;
    std::span<double> grad_weighted;
    std::span<double> grad_difference;
};

/// Accumulates the requested sums over all j != exclude (exclude < 0 keeps every j).
/// `weights` (same layout as `points`) and `w_self` are required for the weighted forms.
/// Throws SingularEvaluation when an exact coulomb kernel meets a zero separation.
void pair_sums(const KernelSpec& spec, std::span<const double> x, const PointCloud& points,
               const PointCloud* weights, std::span<const double> w_self, std::ptrdiff_t exclude,
               const PairRequest& request, const PairOutput& out);

namespace simd {

enum class Level { scalar, avx2 };

const char* to_string(Level level);
Level parse_level(std::string_view name);

/// Best level the host supports.
Level detected_level();
/// Level in use: MFB_SIMD=scalar|avx2 if set and supported, else detected_level().
Level active_level();
/// Forces a level; throws InvalidArgument if the host cannot run it.
void set_level(Level level);

}  // namespace simd

}  // namespace mfb

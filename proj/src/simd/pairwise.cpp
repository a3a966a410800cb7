#include "mfb/pairwise.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "mfb/error.hpp"
#include "pair_kernels.hpp"

namespace mfb {

PointCloud PointCloud::from_rows(std::span<const double> rows, std::size_t dim) {
    PointCloud cloud;
    cloud.assign_rows(rows, dim);
    return cloud;
}

void PointCloud::assign_rows(std::span<const double> rows, std::size_t d) {
    dim = d;
    n = rows.size() / d;
    coords.resize(rows.size());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < d; ++k) coords[k * n + j] = rows[j * d + k];
    }
}

namespace simd {

namespace {

constexpr int kUnset = -1;
std::atomic<int> g_level{kUnset};

bool host_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool supported(Level level) {
    return level == Level::scalar || (detail::avx2_compiled() && host_has_avx2());
}

}  // namespace

const char* to_string(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

Level parse_level(std::string_view name) {
    if (name == "scalar") return Level::scalar;
    if (name == "avx2") return Level::avx2;
    throw Error(ErrorCode::invalid_argument, "unknown SIMD level '" + std::string(name) + "'");
}

Level detected_level() { return supported(Level::avx2) ? Level::avx2 : Level::scalar; }

Level active_level() {
    int cached = g_level.load();
    if (cached == kUnset) {
        Level level = detected_level();
        if (const char* env = std::getenv("MFB_SIMD"); env != nullptr) {
            try {
                const Level requested = parse_level(env);
                if (supported(requested)) level = requested;
            } catch (const Error&) {
            }
        }
        cached = static_cast<int>(level);
        g_level.store(cached);
    }
    return static_cast<Level>(cached);
}

void set_level(Level level) {
    if (!supported(level)) {
        throw Error(ErrorCode::invalid_argument, std::string("SIMD level ") + to_string(level) + " is not available");
    }
    g_level.store(static_cast<int>(level));
}

}  // namespace simd

void pair_sums(const KernelSpec& spec, std::span<const double> x, const PointCloud& points,
               const PointCloud* weights, std::span<const double> w_self, std::ptrdiff_t exclude,
               const PairRequest& request, const PairOutput& out) {
    const std::size_t d = points.dim;
    if (x.size() != d || d == 0 || d > 16) throw Error(ErrorCode::invalid_argument, "pair_sums: bad dimension");
    const bool weighted = request.grad_weighted || request.grad_difference;
    if (weighted && (weights == nullptr || weights->n != points.n || weights->dim != d)) {
        throw Error(ErrorCode::invalid_argument, "pair_sums: weights must match the point set");
    }
    if (request.grad_difference && w_self.size() != d) {
        throw Error(ErrorCode::invalid_argument, "pair_sums: difference form needs w_self");
    }
    if (request.value) std::fill(out.value.begin(), out.value.end(), 0.0);
    if (request.grad) std::fill(out.grad.begin(), out.grad.end(), 0.0);
    if (request.grad_weighted) std::fill(out.grad_weighted.begin(), out.grad_weighted.end(), 0.0);
    if (request.grad_difference) std::fill(out.grad_difference.begin(), out.grad_difference.end(), 0.0);
    if (spec.kind == KernelKind::zero || points.n == 0) return;

    simd::detail::PairArgs args{};
    args.kind = spec.kind == KernelKind::gaussian_linear ? simd::detail::SpatialKind::gaussian
                                                         : simd::detail::SpatialKind::coulomb;
    args.exponent = -0.5 * (spec.beta + 1.0);
    args.delta2 = spec.delta * spec.delta;
    args.dim = d;
    args.n = points.n;
    args.x = x.data();
    args.ys = points.coords.data();
    args.ws = weighted ? weights->coords.data() : nullptr;
    args.w_self = request.grad_difference ? w_self.data() : nullptr;
    args.want_value = request.value;
    args.want_grad = request.grad;
    args.want_weighted = request.grad_weighted;
    args.want_difference = request.grad_difference;
    args.value = out.value.data();
    args.grad = out.grad.data();
    args.weighted = out.grad_weighted.data();
    args.difference = out.grad_difference.data();

    const auto kernel = simd::active_level() == simd::Level::avx2 ? &simd::detail::pair_range_avx2
                                                                  : &simd::detail::pair_range_scalar;
    auto run = [&](std::size_t begin, std::size_t end) {
        if (begin >= end) return;
        args.begin = begin;
        args.end = end;
        if (!kernel(args)) {
            throw Error(ErrorCode::singular_evaluation, "coulomb kernel with delta=0 met two coincident particles");
        }
    };
    if (exclude >= 0 && static_cast<std::size_t>(exclude) < points.n) {
        run(0, static_cast<std::size_t>(exclude));
        run(static_cast<std::size_t>(exclude) + 1, points.n);
    } else {
        run(0, points.n);
    }
}

}  // namespace mfb

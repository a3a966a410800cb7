#include "pair_kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include "vec_math_avx2.hpp"

namespace mfb::simd::detail {

namespace {

constexpr std::size_t kLanes = 4;
constexpr std::size_t kMaxDim = 4;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Fixed-dimension body so the accumulator arrays stay in registers.
template <std::size_t D>
bool pair_range_fixed(const PairArgs& a) {
    const std::size_t n = a.n;
    const std::size_t stop = a.begin + (a.end - a.begin) / kLanes * kLanes;

    __m256d xs[D];
    __m256d self[D];
    for (std::size_t k = 0; k < D; ++k) {
        xs[k] = _mm256_set1_pd(a.x[k]);
        self[k] = _mm256_set1_pd(a.w_self != nullptr ? a.w_self[k] : 0.0);
    }
    __m256d acc_value[D];
    __m256d acc_grad[D * D];
    __m256d acc_weighted[D];
    __m256d acc_diff[D];
    for (std::size_t k = 0; k < D; ++k) {
        acc_value[k] = acc_weighted[k] = acc_diff[k] = _mm256_setzero_pd();
    }
    for (std::size_t k = 0; k < D * D; ++k) acc_grad[k] = _mm256_setzero_pd();

    const __m256d zero = _mm256_setzero_pd();
    const __m256d delta2 = _mm256_set1_pd(a.delta2);
    const __m256d exponent = _mm256_set1_pd(a.exponent);
    const __m256d two_exponent = _mm256_set1_pd(2.0 * a.exponent);
    bool ok = true;

    for (std::size_t j = a.begin; j < stop; j += kLanes) {
        __m256d z[D];
        __m256d r2 = zero;
        for (std::size_t k = 0; k < D; ++k) {
            z[k] = _mm256_sub_pd(xs[k], _mm256_loadu_pd(a.ys + k * n + j));
            r2 = _mm256_fmadd_pd(z[k], z[k], r2);
        }
        __m256d s;
        __m256d q;
        if (a.kind == SpatialKind::gaussian) {
            s = exp_pd(_mm256_sub_pd(zero, r2));
            q = _mm256_mul_pd(_mm256_set1_pd(-2.0), s);
        } else {
            const __m256d rho2 = _mm256_add_pd(r2, delta2);
            if (_mm256_movemask_pd(_mm256_cmp_pd(rho2, zero, _CMP_EQ_OQ)) != 0) {
                ok = false;
                break;
            }
            s = exp_pd(_mm256_mul_pd(exponent, log_pd(rho2)));
            q = _mm256_div_pd(_mm256_mul_pd(two_exponent, s), rho2);
        }
        if (a.want_value) {
            for (std::size_t k = 0; k < D; ++k) acc_value[k] = _mm256_fmadd_pd(s, z[k], acc_value[k]);
        }
        if (a.want_grad) {
            for (std::size_t r = 0; r < D; ++r) {
                const __m256d qz = _mm256_mul_pd(q, z[r]);
                for (std::size_t c = 0; c < D; ++c) {
                    __m256d term = _mm256_mul_pd(qz, z[c]);
                    if (r == c) term = _mm256_add_pd(s, term);
                    acc_grad[r * D + c] = _mm256_add_pd(acc_grad[r * D + c], term);
                }
            }
        }
        if (a.want_weighted) {
            __m256d u[D];
            __m256d zw = zero;
            for (std::size_t k = 0; k < D; ++k) {
                u[k] = _mm256_loadu_pd(a.ws + k * n + j);
                zw = _mm256_fmadd_pd(z[k], u[k], zw);
            }
            const __m256d qzw = _mm256_mul_pd(q, zw);
            for (std::size_t k = 0; k < D; ++k) {
                acc_weighted[k] = _mm256_add_pd(acc_weighted[k], _mm256_fmadd_pd(s, u[k], _mm256_mul_pd(qzw, z[k])));
            }
        }
        if (a.want_difference) {
            __m256d u[D];
            __m256d zw = zero;
            for (std::size_t k = 0; k < D; ++k) {
                u[k] = _mm256_sub_pd(self[k], _mm256_loadu_pd(a.ws + k * n + j));
                zw = _mm256_fmadd_pd(z[k], u[k], zw);
            }
            const __m256d qzw = _mm256_mul_pd(q, zw);
            for (std::size_t k = 0; k < D; ++k) {
                acc_diff[k] = _mm256_add_pd(acc_diff[k], _mm256_fmadd_pd(s, u[k], _mm256_mul_pd(qzw, z[k])));
            }
        }
    }
    if (!ok) return false;

    for (std::size_t k = 0; k < D; ++k) {
        if (a.want_value) a.value[k] += hsum(acc_value[k]);
        if (a.want_weighted) a.weighted[k] += hsum(acc_weighted[k]);
        if (a.want_difference) a.difference[k] += hsum(acc_diff[k]);
    }
    if (a.want_grad) {
        for (std::size_t k = 0; k < D * D; ++k) a.grad[k] += hsum(acc_grad[k]);
    }

    PairArgs tail = a;
    tail.begin = stop;
    return pair_range_scalar(tail);
}

}  // namespace

bool pair_range_avx2(const PairArgs& a) {
    switch (a.dim) {
        case 1: return pair_range_fixed<1>(a);
        case 2: return pair_range_fixed<2>(a);
        case 3: return pair_range_fixed<3>(a);
        case 4: return pair_range_fixed<4>(a);
        default: return pair_range_scalar(a);
    }
    static_assert(kMaxDim == 4);
}

bool avx2_compiled() { return true; }

}  // namespace mfb::simd::detail

#else

namespace mfb::simd::detail {

bool pair_range_avx2(const PairArgs& a) { return pair_range_scalar(a); }
bool avx2_compiled() { return false; }

}  // namespace mfb::simd::detail

#endif

#pragma once

// Cephes-derived exp/log on four doubles. Accurate to a few ulp over the
// ranges the pairwise kernels feed them; inputs to log must be positive normals.

#include <immintrin.h>

namespace mfb::simd::detail {

inline __m256d polevl(__m256d x, const double* c, int degree) {
    __m256d acc = _mm256_set1_pd(c[0]);
    for (int i = 1; i <= degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
    return acc;
}

inline __m256d p1evl(__m256d x, const double* c, int degree) {
    __m256d acc = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
    for (int i = 1; i < degree; ++i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
    return acc;
}

// Four int64 lanes (small magnitudes) to double.
inline __m256d int64_to_pd(__m256i v) {
    const __m256i idx = _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
    const __m256i packed = _mm256_permutevar8x32_epi32(v, idx);
    return _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));
}

inline __m256d exp_pd(__m256d x) {
    static const double P[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2, 9.99999999999999999910e-1};
    static const double Q[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3, 2.27265548208155028766e-1,
                               2.00000000000000000009e0};
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), _mm256_set1_pd(709.0));

    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), x);
    x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), x);

    const __m256d xx = _mm256_mul_pd(x, x);
    const __m256d px = _mm256_mul_pd(x, polevl(xx, P, 2));
    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(polevl(xx, Q, 3), px));
    r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

    const __m256i n = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(fx));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52);
    r = _mm256_mul_pd(r, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, r);
}

inline __m256d log_pd(__m256d x) {
    static const double P[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1, 4.70579119878881725854e0,
                               1.44989225341610930846e1,  1.79368678507819816313e1,  7.70838733755885391666e0};
    static const double Q[] = {1.12873587189167450590e1, 4.52279145837532221105e1, 8.29875266912776603211e1,
                               7.11544750618563894466e1, 2.31251620126765340583e1};

    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_bits = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
    __m256d e = int64_to_pd(_mm256_sub_epi64(exp_bits, _mm256_set1_epi64x(1022)));
    const __m256i mant_bits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x800fffffffffffffLL)),
                                              _mm256_set1_epi64x(0x3fe0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant_bits);  // [0.5, 1)

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

    const __m256d z = _mm256_mul_pd(m, m);
    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, polevl(m, P, 5)), p1evl(m, Q, 5)));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    __m256d r = _mm256_add_pd(m, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
    return r;
}

}  // namespace mfb::simd::detail

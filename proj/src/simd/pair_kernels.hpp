#pragma once

// Internal contract between the dispatcher and the per-ISA pairwise kernels.

#include <cstddef>

namespace mfb::simd::detail {

enum class SpatialKind { gaussian, coulomb };

struct PairArgs {
    SpatialKind kind;
    double exponent;  // coulomb: -(beta + 1) / 2
    double delta2;
    std::size_t dim;
    std::size_t n;
    const double* x;
    const double* ys;       // SoA, stride n
    const double* ws;       // SoA, stride n; may be null
    const double* w_self;   // dim entries; may be null
    std::size_t begin;      // half-open j range
    std::size_t end;
    bool want_value;
    bool want_grad;
    bool want_weighted;
    bool want_difference;
    double* value;
    double* grad;
    double* weighted;
    double* difference;
};

// Each kernel adds its range's contributions into the outputs and returns false
// if a zero separation was met with delta2 == 0 (coulomb only).
bool pair_range_scalar(const PairArgs& args);
bool pair_range_avx2(const PairArgs& args);

bool avx2_compiled();

}  // namespace mfb::simd::detail

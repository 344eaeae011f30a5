// NEON kernel variants for aarch64 builds.

#include "kernels_internal.hpp"

#include <arm_neon.h>
#include <cmath>

namespace sasse::kernels::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sqdist_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void threshold_bits_neon(const double* v, std::size_t n, double tau, std::uint8_t* bits) {
    const float64x2_t vt = vdupq_n_f64(tau);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(v + i), vt);
        bits[i + 0] = static_cast<std::uint8_t>(vgetq_lane_u64(mask, 0) & 1);
        bits[i + 1] = static_cast<std::uint8_t>(vgetq_lane_u64(mask, 1) & 1);
    }
    for (; i < n; ++i) bits[i] = v[i] > tau ? 1 : 0;
}

}  // namespace

const Ops neon_ops = {dot_neon, sqdist_neon, axpy_neon, threshold_bits_neon};

}  // namespace sasse::kernels::detail

#include "kernels_internal.hpp"

namespace sasse::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void threshold_bits_scalar(const double* v, std::size_t n, double tau, std::uint8_t* bits) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = v[i] > tau ? 1 : 0;
}

}  // namespace

const Ops scalar_ops = {dot_scalar, sqdist_scalar, axpy_scalar, threshold_bits_scalar};

}  // namespace sasse::kernels::detail

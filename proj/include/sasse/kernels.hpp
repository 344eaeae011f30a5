#pragma once

#include <cstddef>
#include <cstdint>

namespace sasse::kernels {

// Arithmetic inner loops used on the prediction path (regressor and
// projection mat-vecs, routing scores, k-means distances, bit thresholding).
// Every kernel has a scalar reference implementation plus SIMD variants
// selected once at runtime from CPU capabilities; the SASSE_KERNELS
// environment variable (scalar | avx2 | neon | auto) forces a backend.
enum class Backend { scalar, avx2, neon };

const char* name(Backend b);
bool available(Backend b);
Backend active();
void set_backend(Backend b);  // throws sasse::ConfigError when unavailable
void reset_backend();         // back to auto-detection

double dot(const double* a, const double* b, std::size_t n);

// Squared Euclidean distance.
double sqdist(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// bits[i] = v[i] > tau ? 1 : 0
void threshold_bits(const double* v, std::size_t n, double tau, std::uint8_t* bits);

// y = A^T x for a row-major rows x cols matrix A; y has length cols.
void matvec_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

}  // namespace sasse::kernels

#pragma once

#include <cstddef>
#include <cstdint>

namespace sasse::kernels::detail {

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sqdist)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*threshold_bits)(const double*, std::size_t, double, std::uint8_t*);
};

extern const Ops scalar_ops;

#if defined(SASSE_HAVE_AVX2_BUILD)
extern const Ops avx2_ops;
#endif
#if defined(SASSE_HAVE_NEON_BUILD)
extern const Ops neon_ops;
#endif

}  // namespace sasse::kernels::detail

#include "sasse/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_internal.hpp"
#include "sasse/errors.hpp"

namespace sasse::kernels {

namespace {

using detail::Ops;

bool cpu_has_avx2() {
#if defined(SASSE_HAVE_AVX2_BUILD)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* ops_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &detail::scalar_ops;
        case Backend::avx2:
#if defined(SASSE_HAVE_AVX2_BUILD)
            return &detail::avx2_ops;
#else
            return nullptr;
#endif
        case Backend::neon:
#if defined(SASSE_HAVE_NEON_BUILD)
            return &detail::neon_ops;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

Backend detect() {
    if (const char* env = std::getenv("SASSE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && available(Backend::avx2)) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && available(Backend::neon)) return Backend::neon;
        // "auto" or an unusable request falls through to detection.
    }
    if (available(Backend::avx2)) return Backend::avx2;
    if (available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

struct State {
    Backend backend;
    const Ops* ops;
};

std::atomic<const State*> g_state{nullptr};

const State* state() {
    const State* s = g_state.load(std::memory_order_acquire);
    if (s) return s;
    static State detected;
    detected.backend = detect();
    detected.ops = ops_for(detected.backend);
    const State* expected = nullptr;
    g_state.compare_exchange_strong(expected, &detected, std::memory_order_acq_rel);
    return g_state.load(std::memory_order_acquire);
}

}  // namespace

const char* name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

bool available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
            return cpu_has_avx2();
        case Backend::neon:
#if defined(SASSE_HAVE_NEON_BUILD)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active() { return state()->backend; }

void set_backend(Backend b) {
    if (!available(b)) throw ConfigError(std::string("kernel backend ") + name(b) + " is unavailable");
    static State forced[3];
    State& slot = forced[static_cast<int>(b)];
    slot.backend = b;
    slot.ops = ops_for(b);
    g_state.store(&slot, std::memory_order_release);
}

void reset_backend() { g_state.store(nullptr, std::memory_order_release); }

double dot(const double* a, const double* b, std::size_t n) { return state()->ops->dot(a, b, n); }

double sqdist(const double* a, const double* b, std::size_t n) {
    return state()->ops->sqdist(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    state()->ops->axpy(alpha, x, y, n);
}

void threshold_bits(const double* v, std::size_t n, double tau, std::uint8_t* bits) {
    state()->ops->threshold_bits(v, n, tau, bits);
}

void matvec_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    const Ops* ops = state()->ops;
    for (std::size_t i = 0; i < rows; ++i) {
        if (x[i] != 0.0) ops->axpy(x[i], a + i * cols, y, cols);
    }
}

}  // namespace sasse::kernels

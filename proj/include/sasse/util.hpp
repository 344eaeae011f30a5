#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace sasse {

// Thread cap from the SASSE_THREADS environment variable; defaults to the
// hardware concurrency, never less than 1.
std::size_t thread_budget();

// Runs fn(i) for every i in [0, n) across at most thread_budget() threads.
// The first exception raised by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// mt19937_64 with hand-rolled draws so streams do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian();

    // Uniform index in [0, n); n must be positive.
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sasse

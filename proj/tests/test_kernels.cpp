#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "sasse/kernels.hpp"
#include "sasse/types.hpp"
#include "sasse/util.hpp"

using namespace sasse;
namespace sk = sasse::kernels;

namespace {

// Restores automatic dispatch when a test forces a backend.
struct BackendGuard {
    ~BackendGuard() { sk::reset_backend(); }
};

std::vector<sk::Backend> simd_backends() {
    std::vector<sk::Backend> out;
    for (sk::Backend b : {sk::Backend::avx2, sk::Backend::neon}) {
        if (sk::available(b)) out.push_back(b);
    }
    return out;
}

const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 65, 1000};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels match straightforward references") {
    BackendGuard guard;
    sk::set_backend(sk::Backend::scalar);
    Rng rng(41);
    for (std::size_t n : kSizes) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.gaussian();
            b[i] = rng.gaussian();
        }
        double dot = 0.0, d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            d2 += (a[i] - b[i]) * (a[i] - b[i]);
        }
        CHECK(sk::dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-13));
        CHECK(sk::sqdist(a.data(), b.data(), n) == doctest::Approx(d2).epsilon(1e-13));
    }
}

TEST_CASE("SIMD variants agree with the scalar reference") {
    BackendGuard guard;
    Rng rng(42);
    for (sk::Backend backend : simd_backends()) {
        for (std::size_t n : kSizes) {
            std::vector<double> a(n), b(n), y0(n), y1(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.gaussian();
                b[i] = rng.gaussian();
                y0[i] = rng.gaussian();
            }
            y1 = y0;
            const double alpha = rng.gaussian();

            sk::set_backend(sk::Backend::scalar);
            const double dot_ref = sk::dot(a.data(), b.data(), n);
            const double d2_ref = sk::sqdist(a.data(), b.data(), n);
            sk::axpy(alpha, a.data(), y0.data(), n);

            sk::set_backend(backend);
            const double scale = std::max(1.0, std::abs(dot_ref));
            CHECK(std::abs(sk::dot(a.data(), b.data(), n) - dot_ref) <= 1e-12 * scale);
            CHECK(std::abs(sk::sqdist(a.data(), b.data(), n) - d2_ref) <=
                  1e-12 * std::max(1.0, d2_ref));
            sk::axpy(alpha, a.data(), y1.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("threshold_bits is bit-identical across backends") {
    BackendGuard guard;
    Rng rng(43);
    for (std::size_t n : kSizes) {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(-1.0, 2.0);
        if (n > 2) {
            v[0] = 0.5;  // exact boundary: strictly-greater must stay 0
            v[1] = std::nan("");
            v[2] = std::numeric_limits<double>::infinity();
        }
        std::vector<std::uint8_t> ref(n, 9);
        sk::set_backend(sk::Backend::scalar);
        sk::threshold_bits(v.data(), n, 0.5, ref.data());
        if (n > 2) {
            CHECK(ref[0] == 0);
            CHECK(ref[1] == 0);
            CHECK(ref[2] == 1);
        }
        for (sk::Backend backend : simd_backends()) {
            std::vector<std::uint8_t> got(n, 7);
            sk::set_backend(backend);
            sk::threshold_bits(v.data(), n, 0.5, got.data());
            CHECK(got == ref);
        }
    }
}

TEST_CASE("matvec_t matches Eigen on all backends") {
    BackendGuard guard;
    Rng rng(44);
    for (std::size_t rows : {1u, 3u, 64u}) {
        for (std::size_t cols : {1u, 5u, 112u}) {
            MatrixRM a(rows, cols);
            Eigen::VectorXd x(static_cast<Eigen::Index>(rows));
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                x(i) = rng.gaussian();
                for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.gaussian();
            }
            const Eigen::VectorXd want = a.transpose() * x;
            std::vector<sk::Backend> backends{sk::Backend::scalar};
            for (auto b : simd_backends()) backends.push_back(b);
            for (sk::Backend backend : backends) {
                sk::set_backend(backend);
                Eigen::VectorXd got(static_cast<Eigen::Index>(cols));
                sk::matvec_t(a.data(), rows, cols, x.data(), got.data());
                CHECK((got - want).lpNorm<Eigen::Infinity>() <=
                      1e-11 * std::max(1.0, want.lpNorm<Eigen::Infinity>()));
            }
        }
    }
}

TEST_CASE("backend selection") {
    BackendGuard guard;
    sk::set_backend(sk::Backend::scalar);
    CHECK(sk::active() == sk::Backend::scalar);
    CHECK(sk::available(sk::Backend::scalar));
    for (sk::Backend b : simd_backends()) {
        sk::set_backend(b);
        CHECK(sk::active() == b);
    }
    sk::reset_backend();
    // Auto-detection picks something usable.
    CHECK(sk::available(sk::active()));
    if (!sk::available(sk::Backend::avx2)) {
        CHECK_THROWS_AS(sk::set_backend(sk::Backend::avx2), ConfigError);
    }
}

}  // TEST_SUITE

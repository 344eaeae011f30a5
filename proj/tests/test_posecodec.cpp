#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sasse/posecodec.hpp"
#include "sasse/util.hpp"

using namespace sasse;

namespace {

// Independent binary16 reference: pattern -> value by summing explicit bit
// contributions (no ldexp on the packed mantissa, unlike the implementation).
double half_value_oracle(std::uint16_t pattern) {
    const int sign = (pattern >> 15) & 1;
    const int exp = (pattern >> 10) & 0x1F;
    double mantissa = 0.0;
    for (int bit = 0; bit < 10; ++bit) {
        if (pattern & (1u << bit)) mantissa += std::pow(2.0, bit - 10);
    }
    double mag;
    if (exp == 31) {
        mag = mantissa == 0.0 ? std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::quiet_NaN();
    } else if (exp == 0) {
        mag = mantissa * std::pow(2.0, -14);
    } else {
        mag = (1.0 + mantissa) * std::pow(2.0, exp - 15);
    }
    return sign ? -mag : mag;
}

// All finite non-negative half values with their patterns, sorted by value.
const std::vector<std::pair<double, std::uint16_t>>& half_table() {
    static const std::vector<std::pair<double, std::uint16_t>> table = [] {
        std::vector<std::pair<double, std::uint16_t>> t;
        for (std::uint32_t p = 0; p < 0x7C00; ++p) {
            t.emplace_back(half_value_oracle(static_cast<std::uint16_t>(p)),
                           static_cast<std::uint16_t>(p));
        }
        std::sort(t.begin(), t.end());
        return t;
    }();
    return table;
}

// Round-to-nearest-even by explicit nearest-neighbor search over the table;
// returns the infinity pattern past the overflow cutoff.
std::uint16_t half_encode_oracle(double z) {
    const std::uint16_t sign = std::signbit(z) ? 0x8000 : 0;
    const double mag = std::abs(z);
    const auto& table = half_table();
    if (mag >= 65520.0) return static_cast<std::uint16_t>(sign | 0x7C00);

    auto hi = std::lower_bound(table.begin(), table.end(), std::make_pair(mag, std::uint16_t(0)));
    if (hi == table.end()) --hi;
    auto lo = hi == table.begin() ? hi : std::prev(hi);
    const double dlo = std::abs(mag - lo->first);
    const double dhi = std::abs(mag - hi->first);
    std::uint16_t pattern;
    if (dlo < dhi) {
        pattern = lo->second;
    } else if (dhi < dlo) {
        pattern = hi->second;
    } else {
        pattern = (lo->second & 1) == 0 ? lo->second : hi->second;  // ties to even
    }
    return static_cast<std::uint16_t>(sign | pattern);
}

}  // namespace

TEST_SUITE("posecodec") {

TEST_CASE("known binary16 patterns") {
    CHECK(encode_scalar_pattern(1.5, 16) == 0x3E00);
    CHECK(encode_scalar_pattern(1.0, 16) == 0x3C00);
    CHECK(encode_scalar_pattern(0.0, 16) == 0x0000);
    CHECK(encode_scalar_pattern(-2.0, 16) == 0xC000);
    CHECK(encode_scalar_pattern(65504.0, 16) == 0x7BFF);
    CHECK(value_of_pattern(0x3E00, 16) == 1.5);
}

TEST_CASE("known binary32 patterns") {
    CHECK(encode_scalar_pattern(1.0, 32) == 0x3F800000u);
    CHECK(encode_scalar_pattern(0.0, 32) == 0u);
    const auto bits = encode_scalar(0.0, 32);
    CHECK(bits.size() == 32);
    CHECK(std::count(bits.begin(), bits.end(), 0) == 32);
}

TEST_CASE("bit vectors are MSB first") {
    const auto bits = encode_scalar(1.5, 16);  // 0x3E00 = 0011111000000000
    REQUIRE(bits.size() == 16);
    const std::uint8_t expected[16] = {0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 16; ++i) CHECK(bits[static_cast<std::size_t>(i)] == expected[i]);
}

TEST_CASE("exhaustive binary16 agreement with the bit-level reference") {
    for (std::uint32_t p = 0; p <= 0xFFFF; ++p) {
        const auto pattern = static_cast<std::uint16_t>(p);
        const double impl = value_of_pattern(pattern, 16);
        const double want = half_value_oracle(pattern);
        if (std::isnan(want)) {
            CHECK(std::isnan(impl));
            continue;
        }
        CHECK(impl == want);
        if (std::isfinite(want)) {
            // Bit-for-bit round trip over every representable value.
            CHECK(encode_scalar_pattern(want, 16) == pattern);
        }
    }
}

TEST_CASE("binary16 rounding matches the table oracle on random doubles") {
    Rng rng(271);
    int checked = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        // Spread magnitudes across the whole half range including subnormals.
        const double mag = std::pow(2.0, rng.uniform(-30.0, 17.0));
        const double z = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag * (1.0 + rng.uniform());
        if (std::abs(z) > 65504.0) {
            CHECK_THROWS_AS(encode_scalar_pattern(z, 16), EncodeError);
            continue;
        }
        CHECK(encode_scalar_pattern(z, 16) == half_encode_oracle(z));
        ++checked;
    }
    CHECK(checked > 10000);
}

TEST_CASE("binary16 halfway cases round to even") {
    // 2049/2048 sits exactly between 1.0 and the next half (1 + 2^-10).
    CHECK(encode_scalar_pattern(1.0 + 0x1.0p-11, 16) == 0x3C00);
    // One ulp further up, the tie is against an odd mantissa and rounds away.
    CHECK(encode_scalar_pattern(1.0 + 3.0 * 0x1.0p-11, 16) == 0x3C02);
    // Subnormal tie: 2^-25 is halfway between 0 and the smallest subnormal.
    CHECK(encode_scalar_pattern(0x1.0p-25, 16) == 0x0000);
    CHECK(encode_scalar_pattern(0x1.8p-25, 16) == 0x0001);
}

TEST_CASE("round trip across precisions") {
    Rng rng(272);
    for (int trial = 0; trial < 2000; ++trial) {
        // b = 16: start from a representable half value.
        const auto hp = static_cast<std::uint16_t>(rng.next_u64() & 0x7BFF);
        const double hv = value_of_pattern(hp, 16);
        CHECK(decode_scalar(encode_scalar(hv, 16), 16) == hv);

        // b = 32: start from a representable float value.
        float f;
        do {
            f = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
        } while (!std::isfinite(f));
        CHECK(decode_scalar(encode_scalar(f, 32), 32) == static_cast<double>(f));

        // b = 64 is exact for any finite double.
        const double d = rng.gaussian() * std::pow(10.0, rng.uniform(-30.0, 30.0));
        CHECK(decode_scalar(encode_scalar(d, 64), 64) == d);
    }
}

TEST_CASE("encode errors") {
    CHECK_THROWS_AS(encode_scalar(std::numeric_limits<double>::quiet_NaN(), 16), EncodeError);
    CHECK_THROWS_AS(encode_scalar(std::numeric_limits<double>::infinity(), 64), EncodeError);
    CHECK_THROWS_AS(encode_scalar(70000.0, 16), EncodeError);
    CHECK_THROWS_AS(encode_scalar(1e39, 32), EncodeError);
    CHECK_NOTHROW(encode_scalar(65504.0, 16));
    CHECK_NOTHROW(encode_scalar(1e38, 32));
    CHECK_THROWS_AS(encode_scalar(1.0, 17), ConfigError);
}

TEST_CASE("decode reports non-finite patterns") {
    std::vector<std::uint8_t> bits(16, 0);
    for (int i = 1; i <= 5; ++i) bits[static_cast<std::size_t>(i)] = 1;  // exponent all ones
    CHECK_THROWS_AS(decode_scalar(bits, 16), NonFiniteDecoded);
    std::fill(bits.begin(), bits.end(), 0);
    CHECK(decode_scalar(bits, 16) == 0.0);
    CHECK_THROWS_AS(decode_scalar(bits, 32), DimensionMismatch);
}

TEST_CASE("encode_pose layout") {
    const PoseVector identity;
    const BinaryLabel label = encode_pose(identity, 16);
    REQUIRE(label.length() == 112);
    // First component 1.0 -> 0x3C00, everything else zero.
    CHECK(pattern_of_bits(std::span(label.bits).subspan(0, 16)) == 0x3C00);
    for (std::size_t i = 16; i < 112; ++i) CHECK(label.bits[i] == 0);

    for (int b : {16, 32, 64}) {
        CHECK(encode_pose(identity, b).length() == static_cast<std::size_t>(7 * b));
    }
}

TEST_CASE("encode_pose reports the failing component") {
    PoseVector p;
    p.t[0] = 1e6;  // overflows binary16
    try {
        encode_pose(p, 16);
        FAIL("expected EncodeError");
    } catch (const EncodeError& e) {
        CHECK(e.component() == 4);
        CHECK(e.kind() == EncodeError::Kind::overflow);
    }
}

TEST_CASE("decode_pose failure paths") {
    const PoseVector identity;
    BinaryLabel label = encode_pose(identity, 16);

    // NaN pattern in the t1 slot (component 4).
    for (int i = 0; i < 16; ++i) label.bits[4 * 16 + static_cast<std::size_t>(i)] = 1;
    const PoseOrFailure bad = decode_pose(label);
    REQUIRE(std::holds_alternative<DecodeFailure>(bad));
    CHECK(std::get<DecodeFailure>(bad).component_index == 4);
    CHECK(std::get<DecodeFailure>(bad).reason == DecodeFailure::Reason::non_finite);

    // All-zero quaternion is degenerate.
    BinaryLabel zeros;
    zeros.b = 16;
    zeros.bits.assign(112, 0);
    const PoseOrFailure degenerate = decode_pose(zeros);
    REQUIRE(std::holds_alternative<DecodeFailure>(degenerate));
    CHECK(std::get<DecodeFailure>(degenerate).reason ==
          DecodeFailure::Reason::degenerate_quaternion);
}

TEST_CASE("decode_pose renormalizes the quaternion") {
    PoseVector p{{0.5, 0, 0, 0}, {1, 1, 1}};
    const PoseOrFailure out = decode_pose(encode_pose(p, 16));
    REQUIRE(std::holds_alternative<PoseVector>(out));
    const PoseVector pose = std::get<PoseVector>(out);
    CHECK(pose.q[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pose.t[0] == 1.0);
}

TEST_CASE("pose round trip through the codec") {
    const PoseVector identity;
    const PoseOrFailure out = decode_pose(encode_pose(identity, 16));
    REQUIRE(std::holds_alternative<PoseVector>(out));
    CHECK(std::get<PoseVector>(out).q == identity.q);
    CHECK(std::get<PoseVector>(out).t == identity.t);

    Rng rng(273);
    for (int trial = 0; trial < 300; ++trial) {
        // Poses built from representable binary16 components round-trip to
        // the quaternion renormalization.
        PoseVector p;
        for (double& v : p.q) {
            v = value_of_pattern(static_cast<std::uint16_t>(rng.next_u64() & 0x3BFF), 16);
        }
        for (double& v : p.t) {
            v = value_of_pattern(static_cast<std::uint16_t>(rng.next_u64() & 0x4FFF), 16);
        }
        double norm = std::sqrt(p.q[0] * p.q[0] + p.q[1] * p.q[1] + p.q[2] * p.q[2] +
                                p.q[3] * p.q[3]);
        if (norm <= 1e-3) continue;
        const PoseOrFailure rt = decode_pose(encode_pose(p, 16));
        REQUIRE(std::holds_alternative<PoseVector>(rt));
        const PoseVector got = std::get<PoseVector>(rt);
        for (int c = 0; c < 4; ++c) {
            CHECK(got.q[static_cast<std::size_t>(c)] ==
                  doctest::Approx(p.q[static_cast<std::size_t>(c)] / norm).epsilon(1e-12));
        }
        CHECK(got.t == p.t);
    }
}

TEST_CASE("bit packing round trip") {
    Rng rng(274);
    for (std::size_t nbits : {1u, 7u, 8u, 9u, 112u, 448u}) {
        std::vector<std::uint8_t> bits(nbits);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const auto packed = pack_bits(bits);
        CHECK(packed.size() == (nbits + 7) / 8);
        CHECK(unpack_bits(packed, nbits) == bits);
    }
    // Big-endian bit order within each byte: bit 0 is the high bit.
    std::vector<std::uint8_t> one{1};
    CHECK(pack_bits(one)[0] == 0x80);
}

}  // TEST_SUITE

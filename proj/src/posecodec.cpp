#include "sasse/posecodec.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace sasse {

namespace {

constexpr std::uint64_t kDoubleFracMask = (std::uint64_t(1) << 52) - 1;

// Round-to-nearest-even conversion of a finite double to a binary16 bit
// pattern. Returns 0x7C00/0xFC00 (infinity) when the value rounds past the
// largest finite half (65504); the caller turns that into an overflow error.
std::uint16_t double_to_half_pattern(double z) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(z);
    const std::uint16_t sign = static_cast<std::uint16_t>((u >> 63) << 15);
    const int exp = static_cast<int>((u >> 52) & 0x7FF);
    const std::uint64_t frac = u & kDoubleFracMask;

    if (exp == 0) {
        // Double subnormals are far below the half subnormal range.
        return sign;
    }
    const int e = exp - 1023;  // unbiased exponent

    if (e >= -14) {
        // Candidate normal half: round the 52-bit fraction to 10 bits.
        std::uint64_t keep = frac >> 42;
        const std::uint64_t rem = frac & ((std::uint64_t(1) << 42) - 1);
        const std::uint64_t half = std::uint64_t(1) << 41;
        if (rem > half || (rem == half && (keep & 1))) ++keep;
        int he = e + 15;
        if (keep == 1024) {  // mantissa rounded up into the next binade
            keep = 0;
            ++he;
        }
        if (he >= 31) return static_cast<std::uint16_t>(sign | 0x7C00);  // overflow to Inf
        return static_cast<std::uint16_t>(sign | (he << 10) | keep);
    }

    if (e < -25) return sign;  // below half the smallest subnormal: rounds to zero
    if (e == -25) {
        // Exactly 2^-25 ties to even (zero); anything above rounds to 2^-24.
        return static_cast<std::uint16_t>(sign | (frac == 0 ? 0 : 1));
    }

    // Subnormal half, e in [-24, -15]. Value = 2^e (1 + frac/2^52); express it
    // in units of 2^-24 using the 53-bit significand and round.
    const std::uint64_t sig = (std::uint64_t(1) << 52) | frac;
    const int shift = -e + 28;  // 52 - (e + 24), in [43, 52]
    std::uint64_t keep = sig >> shift;
    const std::uint64_t rem = sig & ((std::uint64_t(1) << shift) - 1);
    const std::uint64_t half = std::uint64_t(1) << (shift - 1);
    if (rem > half || (rem == half && (keep & 1))) ++keep;
    // keep == 1024 carries into exponent field 1 (== 2^-14) by construction.
    return static_cast<std::uint16_t>(sign | keep);
}

double half_pattern_to_double(std::uint16_t h) {
    const int sign = (h >> 15) & 1;
    const int exp = (h >> 10) & 0x1F;
    const int frac = h & 0x3FF;
    double mag;
    if (exp == 0) {
        mag = std::ldexp(static_cast<double>(frac), -24);
    } else if (exp == 31) {
        mag = frac == 0 ? std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::quiet_NaN();
    } else {
        mag = std::ldexp(1.0 + static_cast<double>(frac) / 1024.0, exp - 15);
    }
    return sign ? -mag : mag;
}

constexpr double kHalfMax = 65504.0;

[[noreturn]] void throw_overflow(double z, int b) {
    throw EncodeError(EncodeError::Kind::overflow, -1,
                      "value " + std::to_string(z) + " overflows binary" + std::to_string(b));
}

}  // namespace

bool valid_precision(int b) { return b == 16 || b == 32 || b == 64; }

std::uint64_t encode_scalar_pattern(double z, int b) {
    if (!valid_precision(b)) throw ConfigError("precision must be 16, 32 or 64");
    if (!std::isfinite(z))
        throw EncodeError(EncodeError::Kind::non_finite, -1, "cannot encode NaN or Inf");

    // Overflow means |z| above the format's largest finite value; accepted
    // inputs always round to a finite pattern.
    switch (b) {
        case 16: {
            if (std::abs(z) > kHalfMax) throw_overflow(z, 16);
            return double_to_half_pattern(z);
        }
        case 32: {
            if (std::abs(z) > static_cast<double>(std::numeric_limits<float>::max()))
                throw_overflow(z, 32);
            return std::bit_cast<std::uint32_t>(static_cast<float>(z));
        }
        default:
            return std::bit_cast<std::uint64_t>(z);
    }
}

std::vector<std::uint8_t> encode_scalar(double z, int b) {
    const std::uint64_t pattern = encode_scalar_pattern(z, b);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i) {
        bits[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>((pattern >> (b - 1 - i)) & 1);
    }
    return bits;
}

double value_of_pattern(std::uint64_t pattern, int b) {
    switch (b) {
        case 16:
            return half_pattern_to_double(static_cast<std::uint16_t>(pattern));
        case 32:
            return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(pattern)));
        case 64:
            return std::bit_cast<double>(pattern);
        default:
            throw ConfigError("precision must be 16, 32 or 64");
    }
}

std::uint64_t pattern_of_bits(std::span<const std::uint8_t> bits) {
    std::uint64_t pattern = 0;
    for (std::uint8_t bit : bits) pattern = (pattern << 1) | (bit & 1);
    return pattern;
}

double decode_scalar(std::span<const std::uint8_t> bits, int b) {
    if (!valid_precision(b)) throw ConfigError("precision must be 16, 32 or 64");
    if (bits.size() != static_cast<std::size_t>(b))
        throw DimensionMismatch("bit vector length " + std::to_string(bits.size()) +
                                " does not match precision " + std::to_string(b));
    const double value = value_of_pattern(pattern_of_bits(bits), b);
    if (!std::isfinite(value)) throw NonFiniteDecoded("pattern decodes to NaN or Inf");
    return value;
}

BinaryLabel encode_pose(const PoseVector& p, int b) {
    if (!valid_precision(b)) throw ConfigError("precision must be 16, 32 or 64");
    BinaryLabel label;
    label.b = b;
    label.bits.reserve(std::size_t(7) * static_cast<std::size_t>(b));
    const std::array<double, 7> flat = p.flat();
    for (int c = 0; c < 7; ++c) {
        try {
            const auto bits = encode_scalar(flat[static_cast<std::size_t>(c)], b);
            label.bits.insert(label.bits.end(), bits.begin(), bits.end());
        } catch (const EncodeError& e) {
            throw EncodeError(e.kind(), c,
                              std::string(e.what()) + " (pose component " + std::to_string(c) + ")");
        }
    }
    return label;
}

const char* to_string(DecodeFailure::Reason r) {
    switch (r) {
        case DecodeFailure::Reason::non_finite: return "non_finite";
        case DecodeFailure::Reason::degenerate_quaternion: return "degenerate_quaternion";
    }
    return "unknown";
}

PoseOrFailure decode_pose(const BinaryLabel& y) {
    if (!valid_precision(y.b)) throw ConfigError("precision must be 16, 32 or 64");
    const std::size_t b = static_cast<std::size_t>(y.b);
    if (y.bits.size() != 7 * b)
        throw DimensionMismatch("label length " + std::to_string(y.bits.size()) +
                                " is not 7b = " + std::to_string(7 * b));

    std::array<double, 7> flat{};
    for (int c = 0; c < 7; ++c) {
        const std::span<const std::uint8_t> bits(y.bits.data() + std::size_t(c) * b, b);
        const double value = value_of_pattern(pattern_of_bits(bits), y.b);
        if (!std::isfinite(value))
            return DecodeFailure{c, DecodeFailure::Reason::non_finite};
        flat[static_cast<std::size_t>(c)] = value;
    }

    PoseVector pose = PoseVector::from_flat(flat);
    const double norm = std::sqrt(pose.q[0] * pose.q[0] + pose.q[1] * pose.q[1] +
                                  pose.q[2] * pose.q[2] + pose.q[3] * pose.q[3]);
    if (norm <= 1e-9) return DecodeFailure{0, DecodeFailure::Reason::degenerate_quaternion};
    for (double& v : pose.q) v /= norm;
    return pose;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] & 1) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
    }
    return bytes;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() * 8 < nbits) throw DimensionMismatch("packed buffer too short");
    std::vector<std::uint8_t> bits(nbits);
    for (std::size_t i = 0; i < nbits; ++i) {
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    }
    return bits;
}

}  // namespace sasse

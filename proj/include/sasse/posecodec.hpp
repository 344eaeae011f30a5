#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sasse/types.hpp"

namespace sasse {

// Fixed-length binary pose label: 7 components of b bits each in the order
// qa qb qc qd t1 t2 t3. Every component is an IEEE-754 bit pattern stored
// MSB first (sign, exponent, mantissa).
struct BinaryLabel {
    std::vector<std::uint8_t> bits;  // one byte per bit, values 0 or 1
    int b = 16;

    std::size_t length() const { return bits.size(); }
};

bool valid_precision(int b);  // 16, 32 or 64

// IEEE-754 bit pattern of z at precision b (binary16/32/64), rounded to
// nearest-even, returned in the low b bits. Throws EncodeError for NaN/Inf
// input or when |z| rounds past the format's largest finite value.
std::uint64_t encode_scalar_pattern(double z, int b);

// Same pattern as a bit vector of length b, MSB first.
std::vector<std::uint8_t> encode_scalar(double z, int b);

// Exact value of a b-bit pattern; NaN and +/-Inf pass through.
double value_of_pattern(std::uint64_t pattern, int b);

std::uint64_t pattern_of_bits(std::span<const std::uint8_t> bits);

// Value of a b-bit vector. Throws NonFiniteDecoded for NaN/Inf patterns.
double decode_scalar(std::span<const std::uint8_t> bits, int b);

// Concatenated encoding h(p) of all 7 pose components; length exactly 7b.
// Component encode errors are rethrown with the component index attached.
BinaryLabel encode_pose(const PoseVector& p, int b);

struct DecodeFailure {
    // 0..6 over qa qb qc qd t1 t2 t3; quaternion-level failures report 0.
    int component_index = 0;
    enum class Reason { non_finite, degenerate_quaternion } reason = Reason::non_finite;
};

const char* to_string(DecodeFailure::Reason r);

using PoseOrFailure = std::variant<PoseVector, DecodeFailure>;

// Inverse operation h^-1 with sanitization: a non-finite component or a
// near-zero quaternion yields DecodeFailure; otherwise the quaternion is
// renormalized and the pose returned.
PoseOrFailure decode_pose(const BinaryLabel& y);

// Packed byte serialization: bit i lands in byte i/8 at position 7 - i%8
// (big-endian bit order within each byte).
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t nbits);

}  // namespace sasse

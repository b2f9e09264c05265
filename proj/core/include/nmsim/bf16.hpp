#pragma once

#include <bit>
#include <cstdint>

namespace nmsim {

/// 16-bit brain float: 1 sign, 8 exponent, 7 mantissa bits.
///
/// Conversions round to nearest, ties to even. Arithmetic helpers compute in
/// binary32 and round once; binary32 carries more than 2p+2 bits for p = 8,
/// so the double rounding is innocuous and every result is correctly rounded.
class Bf16
{
public:
    constexpr Bf16() = default;

    static constexpr Bf16 from_bits(std::uint16_t bits)
    {
        Bf16 v;
        v.bits_ = bits;
        return v;
    }

    static Bf16 from_float(float value)
    {
        auto u = std::bit_cast<std::uint32_t>(value);
        if ((u & 0x7fffffffu) > 0x7f800000u)
        {
            // NaN: keep the sign and force a quiet payload
            return from_bits(static_cast<std::uint16_t>((u >> 16) | 0x0040u));
        }
        u += 0x7fffu + ((u >> 16) & 1u);
        return from_bits(static_cast<std::uint16_t>(u >> 16));
    }

    float to_float() const
    {
        return std::bit_cast<float>(static_cast<std::uint32_t>(bits_) << 16);
    }

    constexpr std::uint16_t bits() const { return bits_; }

    constexpr bool is_finite() const { return (bits_ & 0x7f80u) != 0x7f80u; }
    constexpr bool is_zero() const { return (bits_ & 0x7fffu) == 0; }

    friend constexpr bool operator==(Bf16 a, Bf16 b) = default;

private:
    std::uint16_t bits_ = 0;
};

Bf16 bf16_add(Bf16 a, Bf16 b);
Bf16 bf16_mul(Bf16 a, Bf16 b);

} // namespace nmsim

#include "nmsim/bf16.hpp"

namespace nmsim {

Bf16 bf16_add(Bf16 a, Bf16 b)
{
    return Bf16::from_float(a.to_float() + b.to_float());
}

Bf16 bf16_mul(Bf16 a, Bf16 b)
{
    return Bf16::from_float(a.to_float() * b.to_float());
}

} // namespace nmsim

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nmsim {

enum class TensorDtype : std::uint8_t { f32 = 1, bf16 = 2 };

/// Flat little-endian tensor file. Header (16 bytes):
///   magic "NMT1" | dtype u8 | rank u8 | reserved u16 | dims 4 x u16
/// followed by the values, 4 bytes each for f32 and 2 for bf16. Unused dims
/// are zero; rank is 1..4.
struct Tensor
{
    TensorDtype dtype = TensorDtype::f32;
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::uint64_t element_count() const;
};

std::string encode_tensor(const Tensor &t);
Tensor decode_tensor(std::string_view bytes);

Tensor load_tensor(const std::string &path);
void save_tensor(const Tensor &t, const std::string &path);

} // namespace nmsim

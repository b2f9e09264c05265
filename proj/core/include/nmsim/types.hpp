#pragma once

#include <cstdint>
#include <string_view>

namespace nmsim {

/// Simulated time, in core clock cycles.
using Cycle = std::uint64_t;

/// Source label carried by every spike packet. Label 0 is the external input;
/// network layer i emits packets labelled i + 1.
using LayerId = std::uint32_t;

/// Row-major router / core index on the mesh: id = y * width + x.
using CoreId = std::uint32_t;

inline constexpr LayerId kInputLabel = 0;

constexpr LayerId output_label(std::size_t layer_index) {
    return static_cast<LayerId>(layer_index + 1);
}

enum class SpikeMode : std::uint8_t { binary, graded };

std::string_view to_string(SpikeMode mode);
SpikeMode parse_spike_mode(std::string_view text);

/// Data-memory word width. Neuron states are one bf16 per word.
inline constexpr unsigned kWordBits = 16;

} // namespace nmsim

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nmsim/bf16.hpp"
#include "nmsim/events.hpp"
#include "nmsim/types.hpp"

namespace nmsim {

enum class QuantKind : std::uint8_t { bf16, int8, int4 };

std::string_view to_string(QuantKind kind);
QuantKind parse_quant_kind(std::string_view text);
unsigned weight_bits(QuantKind kind);
/// Data-memory words needed to store `count` weights of this kind.
std::uint64_t weight_words(QuantKind kind, std::uint64_t count);

struct QuantScheme
{
    QuantKind kind = QuantKind::bf16;
    /// Per-layer symmetric scale; 1 for bf16.
    float scale = 1.0f;
};

/// Quantized weight tensor. Integer kinds keep their codes; every kind keeps
/// the bf16 value the NPEs compute with.
struct QuantizedWeights
{
    QuantScheme scheme;
    std::vector<std::int8_t> codes;
    std::vector<Bf16> values;

    std::size_t size() const { return values.size(); }
    /// code * scale without bf16 rounding (integer kinds).
    double exact_value(std::size_t i) const;
};

/// Round-to-nearest with scale = max|w| / (2^(bits-1) - 1). An all-zero
/// matrix gets scale 1. bf16 rounds each weight to nearest-even.
QuantizedWeights quantize_weights(std::span<const float> weights,
        QuantKind kind);

/// state + w (binary) or state + w * value (graded), each step rounded to
/// bf16. Throws NumericFault when the result is not finite.
Bf16 neuron_update(Bf16 state, Bf16 weight, std::optional<Bf16> spike_value);

struct DenseShape
{
    std::uint32_t n_in = 0;
    std::uint32_t n_out = 0;

    friend bool operator==(const DenseShape &, const DenseShape &) = default;
};

/// Valid-padding convolution over an h x w x c_in input, raster layout
/// index = (y * w + x) * c + channel.
struct ConvShape
{
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::uint32_t c_in = 0;
    std::uint32_t c_out = 0;
    std::uint32_t k = 1;
    std::uint32_t stride = 1;

    std::uint32_t out_h() const { return (h - k) / stride + 1; }
    std::uint32_t out_w() const { return (w - k) / stride + 1; }

    friend bool operator==(const ConvShape &, const ConvShape &) = default;
};

enum class ExecutionStyle : std::uint8_t { stateful, depth_first };

std::string_view to_string(ExecutionStyle style);
ExecutionStyle parse_execution_style(std::string_view text);

struct LayerSpec
{
    std::variant<DenseShape, ConvShape> shape;
    SpikeMode spike_mode = SpikeMode::graded;
    float threshold = 1.0f;
    QuantKind weight_scheme = QuantKind::bf16;
    ExecutionStyle style = ExecutionStyle::stateful;

    bool is_conv() const { return std::holds_alternative<ConvShape>(shape); }
    const DenseShape &dense() const { return std::get<DenseShape>(shape); }
    const ConvShape &conv() const { return std::get<ConvShape>(shape); }

    std::uint32_t input_size() const;
    std::uint32_t output_size() const;
    std::uint64_t weight_count() const;
    /// Synapses into one output neuron (dense n_in, conv k*k*c_in).
    std::uint32_t fan_in() const;

    void validate() const;

    friend bool operator==(const LayerSpec &, const LayerSpec &) = default;
};

struct FireResult
{
    Bf16 state;
    bool fired = false;
    std::optional<Bf16> value; // graded only
};

/// Binary: fire iff state >= threshold, then reset to 0; below threshold the
/// state is kept. Graded: emit max(state, 0) when non-zero; state resets.
FireResult threshold_fire(Bf16 state, const LayerSpec &spec);

struct NetworkSpec
{
    std::string name;
    std::uint32_t input_dim = 0;
    SpikeMode input_mode = SpikeMode::graded;
    std::vector<LayerSpec> layers;

    /// Throws ConfigError if consecutive layer dimensions do not compose.
    void validate() const;
    SourceLayer source_layer(LayerId label) const;

    friend bool operator==(const NetworkSpec &, const NetworkSpec &) = default;
};

struct Network
{
    NetworkSpec spec;
    std::vector<QuantizedWeights> weights; // one per layer

    void validate() const;
};

/// Deterministic 64-bit generator for weights and stimuli; uniform draws are
/// derived from raw bits so sequences do not depend on the standard library.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
            : engine_(seed)
    {
    }
    std::uint64_t next() { return engine_(); }
    /// [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    std::mt19937_64 engine_;
};

struct WeightGenerator
{
    std::uint64_t seed = 7;
    /// Weights are U(-1, 1) * gain / sqrt(fan_in) + bias / sqrt(fan_in).
    double gain = 2.0;
    double bias = 0.0;

    friend bool operator==(const WeightGenerator &, const WeightGenerator &) = default;
};

std::vector<float> generate_weights(const LayerSpec &layer,
        std::uint64_t seed, double gain, double bias);

/// Quantizes generated weights for every layer.
Network build_network(NetworkSpec spec, const WeightGenerator &gen);
Network build_network(NetworkSpec spec,
        const std::vector<std::vector<float>> &raw);

/// Dense network with the given input size and per-layer outputs.
NetworkSpec dense_network_spec(std::string name, std::uint32_t input_dim,
        const std::vector<std::uint32_t> &outputs, SpikeMode mode,
        QuantKind scheme, float threshold = 1.0f);

} // namespace nmsim

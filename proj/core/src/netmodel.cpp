#include "nmsim/netmodel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::string_view to_string(QuantKind kind)
{
    switch (kind)
    {
    case QuantKind::bf16:
        return "bf16";
    case QuantKind::int8:
        return "int8";
    case QuantKind::int4:
        return "int4";
    }
    return "?";
}

QuantKind parse_quant_kind(std::string_view text)
{
    for (QuantKind k : {QuantKind::bf16, QuantKind::int8, QuantKind::int4})
    {
        if (to_string(k) == text)
        {
            return k;
        }
    }
    throw ConfigError(fmt::format("unknown weight scheme '{}'", text));
}

unsigned weight_bits(QuantKind kind)
{
    switch (kind)
    {
    case QuantKind::bf16:
        return 16;
    case QuantKind::int8:
        return 8;
    case QuantKind::int4:
        return 4;
    }
    return 16;
}

std::uint64_t weight_words(QuantKind kind, std::uint64_t count)
{
    return (count * weight_bits(kind) + kWordBits - 1) / kWordBits;
}

double QuantizedWeights::exact_value(std::size_t i) const
{
    if (scheme.kind == QuantKind::bf16)
    {
        return values[i].to_float();
    }
    return static_cast<double>(codes[i]) * static_cast<double>(scheme.scale);
}

QuantizedWeights quantize_weights(std::span<const float> weights,
        QuantKind kind)
{
    QuantizedWeights q;
    q.scheme.kind = kind;
    q.values.reserve(weights.size());
    for (float w : weights)
    {
        if (!std::isfinite(w))
        {
            throw NumericFault("quantize_weights: non-finite weight");
        }
    }

    if (kind == QuantKind::bf16)
    {
        q.scheme.scale = 1.0f;
        for (float w : weights)
        {
            q.values.push_back(Bf16::from_float(w));
        }
        return q;
    }

    const int qmax = (1 << (weight_bits(kind) - 1)) - 1;
    float max_abs = 0.0f;
    for (float w : weights)
    {
        max_abs = std::max(max_abs, std::fabs(w));
    }
    q.scheme.scale = max_abs == 0.0f ? 1.0f : max_abs / static_cast<float>(qmax);
    q.codes.reserve(weights.size());
    for (float w : weights)
    {
        const double scaled = static_cast<double>(w) / q.scheme.scale;
        const auto code = static_cast<int>(std::clamp(
                std::nearbyint(scaled), static_cast<double>(-qmax),
                static_cast<double>(qmax)));
        q.codes.push_back(static_cast<std::int8_t>(code));
        q.values.push_back(
                Bf16::from_float(static_cast<float>(code) * q.scheme.scale));
    }
    return q;
}

Bf16 neuron_update(Bf16 state, Bf16 weight, std::optional<Bf16> spike_value)
{
    const Bf16 contribution =
            spike_value ? bf16_mul(weight, *spike_value) : weight;
    const Bf16 next = bf16_add(state, contribution);
    if (!next.is_finite())
    {
        throw NumericFault(fmt::format(
                "neuron state overflow: {} + {} is not finite",
                state.to_float(), contribution.to_float()));
    }
    return next;
}

std::string_view to_string(ExecutionStyle style)
{
    return style == ExecutionStyle::stateful ? "stateful" : "depth-first";
}

ExecutionStyle parse_execution_style(std::string_view text)
{
    if (text == "stateful")
    {
        return ExecutionStyle::stateful;
    }
    if (text == "depth-first" || text == "depth_first")
    {
        return ExecutionStyle::depth_first;
    }
    throw ConfigError(fmt::format("unknown conv execution style '{}'", text));
}

std::uint32_t LayerSpec::input_size() const
{
    if (is_conv())
    {
        const ConvShape &c = conv();
        return c.h * c.w * c.c_in;
    }
    return dense().n_in;
}

std::uint32_t LayerSpec::output_size() const
{
    if (is_conv())
    {
        const ConvShape &c = conv();
        return c.out_h() * c.out_w() * c.c_out;
    }
    return dense().n_out;
}

std::uint64_t LayerSpec::weight_count() const
{
    if (is_conv())
    {
        const ConvShape &c = conv();
        return std::uint64_t{c.k} * c.k * c.c_in * c.c_out;
    }
    return std::uint64_t{dense().n_in} * dense().n_out;
}

std::uint32_t LayerSpec::fan_in() const
{
    if (is_conv())
    {
        const ConvShape &c = conv();
        return c.k * c.k * c.c_in;
    }
    return dense().n_in;
}

void LayerSpec::validate() const
{
    if (is_conv())
    {
        const ConvShape &c = conv();
        if (c.h == 0 || c.w == 0 || c.c_in == 0 || c.c_out == 0 || c.k == 0)
        {
            throw ConfigError("conv layer dimensions must be positive");
        }
        if (c.k > c.h || c.k > c.w)
        {
            throw ConfigError(fmt::format(
                    "conv kernel {} larger than input {}x{}", c.k, c.h, c.w));
        }
        if (c.stride != 1 && c.stride != 2)
        {
            throw ConfigError(fmt::format(
                    "conv stride must be 1 or 2, got {}", c.stride));
        }
    }
    else
    {
        if (dense().n_in == 0 || dense().n_out == 0)
        {
            throw ConfigError("dense layer dimensions must be positive");
        }
        if (style == ExecutionStyle::depth_first)
        {
            throw ConfigError("depth-first execution applies to conv layers only");
        }
    }
    if (spike_mode == SpikeMode::binary && !(threshold > 0.0f))
    {
        throw ConfigError("binary layers need a positive threshold");
    }
}

FireResult threshold_fire(Bf16 state, const LayerSpec &spec)
{
    FireResult r;
    if (spec.spike_mode == SpikeMode::binary)
    {
        if (state.to_float() >= spec.threshold)
        {
            r.fired = true;
            r.state = Bf16{};
        }
        else
        {
            r.state = state;
        }
        return r;
    }
    r.state = Bf16{};
    if (state.to_float() > 0.0f)
    {
        r.fired = true;
        r.value = state;
    }
    return r;
}

void NetworkSpec::validate() const
{
    if (layers.empty())
    {
        return;
    }
    std::uint32_t expected = input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        layers[i].validate();
        if (layers[i].input_size() != expected)
        {
            throw ConfigError(fmt::format(
                    "network '{}': layer {} expects {} inputs but receives {}",
                    name, i, layers[i].input_size(), expected));
        }
        expected = layers[i].output_size();
    }
}

SourceLayer NetworkSpec::source_layer(LayerId label) const
{
    if (label == kInputLabel)
    {
        return {kInputLabel, input_dim, input_mode};
    }
    const LayerSpec &l = layers.at(label - 1);
    return {label, l.output_size(), l.spike_mode};
}

void Network::validate() const
{
    spec.validate();
    if (weights.size() != spec.layers.size())
    {
        throw ConfigError(fmt::format("network '{}': {} weight tensors for {} "
                                      "layers",
                spec.name, weights.size(), spec.layers.size()));
    }
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        if (weights[i].size() != spec.layers[i].weight_count())
        {
            throw ConfigError(fmt::format(
                    "network '{}': layer {} has {} weights, expected {}",
                    spec.name, i, weights[i].size(),
                    spec.layers[i].weight_count()));
        }
    }
}

std::vector<float> generate_weights(const LayerSpec &layer,
        std::uint64_t seed, double gain, double bias)
{
    Rng rng(seed);
    const double norm = 1.0 / std::sqrt(static_cast<double>(layer.fan_in()));
    std::vector<float> w(layer.weight_count());
    for (float &v : w)
    {
        v = static_cast<float>((rng.uniform(-1.0, 1.0) * gain + bias) * norm);
    }
    return w;
}

Network build_network(NetworkSpec spec, const WeightGenerator &gen)
{
    std::vector<std::vector<float>> raw;
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
    {
        raw.push_back(generate_weights(spec.layers[i], gen.seed + 1000003 * i,
                gen.gain, gen.bias));
    }
    return build_network(std::move(spec), raw);
}

Network build_network(NetworkSpec spec,
        const std::vector<std::vector<float>> &raw)
{
    spec.validate();
    if (raw.size() != spec.layers.size())
    {
        throw ConfigError("build_network: one weight tensor per layer required");
    }
    Network net;
    for (std::size_t i = 0; i < raw.size(); ++i)
    {
        net.weights.push_back(
                quantize_weights(raw[i], spec.layers[i].weight_scheme));
    }
    net.spec = std::move(spec);
    net.validate();
    return net;
}

NetworkSpec dense_network_spec(std::string name, std::uint32_t input_dim,
        const std::vector<std::uint32_t> &outputs, SpikeMode mode,
        QuantKind scheme, float threshold)
{
    NetworkSpec spec;
    spec.name = std::move(name);
    spec.input_dim = input_dim;
    spec.input_mode = mode;
    std::uint32_t n_in = input_dim;
    for (std::uint32_t n_out : outputs)
    {
        LayerSpec layer;
        layer.shape = DenseShape{n_in, n_out};
        layer.spike_mode = mode;
        layer.threshold = threshold;
        layer.weight_scheme = scheme;
        spec.layers.push_back(layer);
        n_in = n_out;
    }
    spec.validate();
    return spec;
}

} // namespace nmsim

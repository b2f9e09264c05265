#include "nmsim/oracle.hpp"

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim::oracle {

std::uint64_t TensorRef::expected_size() const
{
    std::uint64_t n = 1;
    for (std::uint32_t d : dims)
    {
        n *= d;
    }
    return n;
}

void TensorRef::check() const
{
    if (values.size() != expected_size())
    {
        throw ConfigError(fmt::format("tensor has {} values, dims imply {}",
                values.size(), expected_size()));
    }
}

std::vector<Bf16> dense_forward(const TensorRef &weights,
        const std::vector<Bf16> &input)
{
    weights.check();
    if (weights.dims.size() != 2 || weights.dims[0] != input.size())
    {
        throw ConfigError("dense_forward: weight rows do not match input size");
    }
    const std::uint32_t n_in = weights.dims[0];
    const std::uint32_t n_out = weights.dims[1];
    std::vector<Bf16> out(n_out);
    for (std::uint32_t j = 0; j < n_out; ++j)
    {
        Bf16 acc;
        for (std::uint32_t i = 0; i < n_in; ++i)
        {
            acc = bf16_add(acc, bf16_mul(weights.values[i * n_out + j], input[i]));
        }
        out[j] = acc;
    }
    return out;
}

TensorRef conv_forward(const TensorRef &input, const TensorRef &kernel,
        std::uint32_t stride)
{
    input.check();
    kernel.check();
    if (input.dims.size() != 3 || kernel.dims.size() != 4)
    {
        throw ConfigError("conv_forward: expected {h,w,c} input, {k,k,ci,co} kernel");
    }
    const std::uint32_t h = input.dims[0], w = input.dims[1],
                        c_in = input.dims[2];
    const std::uint32_t k = kernel.dims[0], c_out = kernel.dims[3];
    if (kernel.dims[1] != k || kernel.dims[2] != c_in || k > h || k > w
            || stride == 0)
    {
        throw ConfigError("conv_forward: kernel does not fit input");
    }
    const std::uint32_t oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;
    TensorRef out{{oh, ow, c_out}, std::vector<Bf16>(std::size_t{oh} * ow * c_out)};
    for (std::uint32_t co = 0; co < c_out; ++co)
    {
        for (std::uint32_t oy = 0; oy < oh; ++oy)
        {
            for (std::uint32_t ox = 0; ox < ow; ++ox)
            {
                Bf16 acc;
                for (std::uint32_t ky = 0; ky < k; ++ky)
                {
                    for (std::uint32_t kx = 0; kx < k; ++kx)
                    {
                        for (std::uint32_t ci = 0; ci < c_in; ++ci)
                        {
                            const Bf16 x = input.values[(std::size_t{oy * stride + ky} * w
                                                                + ox * stride + kx)
                                            * c_in
                                    + ci];
                            const Bf16 wt = kernel.values[((std::size_t{ky} * k + kx) * c_in
                                                                  + ci)
                                            * c_out
                                    + co];
                            acc = bf16_add(acc, bf16_mul(wt, x));
                        }
                    }
                }
                out.values[(std::size_t{oy} * ow + ox) * c_out + co] = acc;
            }
        }
    }
    return out;
}

std::vector<LayerActivation> network_forward(const Network &net,
        const std::vector<Bf16> &input)
{
    net.validate();
    if (input.size() != net.spec.input_dim)
    {
        throw ConfigError(fmt::format("network_forward: input has {} values, "
                                      "network expects {}",
                input.size(), net.spec.input_dim));
    }
    std::vector<LayerActivation> acts;
    std::vector<Bf16> x = input;
    for (std::size_t i = 0; i < net.spec.layers.size(); ++i)
    {
        const LayerSpec &layer = net.spec.layers[i];
        LayerActivation a;
        if (layer.is_conv())
        {
            const ConvShape &c = layer.conv();
            TensorRef in{{c.h, c.w, c.c_in}, x};
            TensorRef kernel{{c.k, c.k, c.c_in, c.c_out}, net.weights[i].values};
            a.states = conv_forward(in, kernel, c.stride).values;
        }
        else
        {
            TensorRef w{{layer.dense().n_in, layer.dense().n_out},
                    net.weights[i].values};
            a.states = dense_forward(w, x);
        }
        a.outputs.resize(a.states.size());
        for (std::size_t j = 0; j < a.states.size(); ++j)
        {
            const FireResult f = threshold_fire(a.states[j], layer);
            if (f.fired)
            {
                a.outputs[j] = f.value ? *f.value : Bf16::from_float(1.0f);
            }
        }
        x = a.outputs;
        acts.push_back(std::move(a));
    }
    return acts;
}

} // namespace nmsim::oracle

#pragma once

#include <cstdint>
#include <vector>

#include "nmsim/bf16.hpp"
#include "nmsim/netmodel.hpp"

namespace nmsim::oracle {

/// Dense tensor of bf16 values, row-major over dims.
struct TensorRef
{
    std::vector<std::uint32_t> dims;
    std::vector<Bf16> values;

    std::uint64_t expected_size() const;
    /// Throws ConfigError when values.size() != product of dims.
    void check() const;
};

/// out[j] = sum_i w[i][j] * x[i], accumulated per j in ascending i, every
/// product and sum rounded to bf16. weights dims = {n_in, n_out}.
std::vector<Bf16> dense_forward(const TensorRef &weights,
        const std::vector<Bf16> &input);

/// Valid convolution. input {h, w, c_in}, kernel {k, k, c_in, c_out}.
/// Loop order: output channel, output row, output column, then ky, kx, ci.
TensorRef conv_forward(const TensorRef &input, const TensorRef &kernel,
        std::uint32_t stride);

struct LayerActivation
{
    std::vector<Bf16> states;  // before thresholding
    std::vector<Bf16> outputs; // 1.0 for a binary spike, the value if graded
};

/// Binary inputs are given as 0 / 1.
std::vector<LayerActivation> network_forward(const Network &net,
        const std::vector<Bf16> &input);

} // namespace nmsim::oracle

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmsim/core_model.hpp"
#include "nmsim/cost_model.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/netmodel.hpp"

namespace nmsim {

struct InputEvent
{
    std::uint32_t index = 0;
    std::optional<Bf16> value; // absent for binary input

    friend bool operator==(const InputEvent &, const InputEvent &) = default;
};

/// One inference step of external input, ascending index.
using Stimulus = std::vector<InputEvent>;

/// Non-zero entries of an activation vector; binary mode drops the values.
Stimulus stimulus_from_vector(std::span<const Bf16> activations,
        SpikeMode mode);
/// Dense activation vector (1.0 for binary events).
std::vector<Bf16> stimulus_to_vector(const Stimulus &s, std::uint32_t size);

struct SimOptions
{
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
    ControlConstants control;
    CostTable table = CostTable::defaults();
    bool record_trace = false;
};

struct CoreReport
{
    CoreId core = 0;
    CostCounters counters;
    double energy_uj = 0.0;
    Cycle busy_cycles = 0;
    Cycle stall_cycles = 0;
    Cycle finish = 0;
    std::uint64_t static_words = 0;
    std::uint64_t peak_words = 0;
    std::uint64_t packets_received = 0;
    std::uint64_t synaptic_ops = 0;
};

struct StepRecord
{
    /// Per layer: emitted outputs as a dense vector (1.0 for binary spikes).
    std::vector<std::vector<Bf16>> outputs;
    /// Per layer: states just before thresholding (stateful layers only).
    std::vector<std::vector<Bf16>> states;
    std::vector<std::uint64_t> spikes; // emitted per layer
};

struct SimResult
{
    std::vector<CoreReport> cores;
    CostCounters totals;
    Cycle makespan = 0;
    std::uint64_t input_events = 0;
    std::uint64_t packets_emitted = 0;  // excludes external input
    std::uint64_t packets_delivered = 0; // local deliveries to cores
    std::uint64_t link_traversals = 0;
    std::uint64_t synaptic_ops = 0;
    std::vector<StepRecord> steps;
    std::vector<std::string> trace;
};

/// Runs each stimulus as one inference step, back to back. Every core uses
/// the same variant. Throws RoutingFault, NumericFault or CausalityError.
SimResult simulate(const Network &net, const Mapping &mapping,
        const SimOptions &opts, std::span<const Stimulus> steps);

} // namespace nmsim

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nmsim/bf16.hpp"
#include "nmsim/types.hpp"

namespace nmsim {

enum class OpClass : std::uint8_t {
    riscv_instr,
    imem_fetch,
    dmem_read_word,
    dmem_write_word,
    npe_op,
    loopctrl_step,
    noc_hop,
    packet_inject,
};

inline constexpr std::size_t kOpClassCount = 8;

inline constexpr std::array<OpClass, kOpClassCount> kAllOpClasses = {
        OpClass::riscv_instr, OpClass::imem_fetch, OpClass::dmem_read_word,
        OpClass::dmem_write_word, OpClass::npe_op, OpClass::loopctrl_step,
        OpClass::noc_hop, OpClass::packet_inject};

std::string_view to_string(OpClass op);
/// Throws ConfigError for an unknown class name.
OpClass parse_op_class(std::string_view text);

/// Per-op-class occurrence counts. Monotone during a run.
class CostCounters
{
public:
    void account(OpClass op, std::uint64_t n)
    {
        counts_[static_cast<std::size_t>(op)] += n;
    }
    /// Name-based variant used by config and report tooling.
    void account(std::string_view op, std::uint64_t n)
    {
        account(parse_op_class(op), n);
    }

    std::uint64_t operator[](OpClass op) const
    {
        return counts_[static_cast<std::size_t>(op)];
    }

    CostCounters &operator+=(const CostCounters &other)
    {
        for (std::size_t i = 0; i < kOpClassCount; ++i)
        {
            counts_[i] += other.counts_[i];
        }
        return *this;
    }

    bool all_zero() const;

    friend bool operator==(const CostCounters &, const CostCounters &) = default;

private:
    std::array<std::uint64_t, kOpClassCount> counts_{};
};

enum class VariantTag : std::uint8_t { v1, v2, v3 };

std::string_view to_string(VariantTag tag);
VariantTag parse_variant(std::string_view text);

/// V1: scalar control core only. V2: + NPE lanes. V3: + loop controller.
struct CoreVariant
{
    VariantTag tag = VariantTag::v3;
    std::uint32_t npe_count = 8;
    std::uint32_t npe_pipeline_depth = 4;

    static CoreVariant make(VariantTag tag);
    bool has_npes() const { return tag != VariantTag::v1; }
    bool has_loop_controller() const { return tag == VariantTag::v3; }
};

/// Instruction-count constants of the control path. These are model
/// parameters, not measurements.
struct ControlConstants
{
    /// V1: scalar instructions per synapse update; the bf16 multiply-add
    /// is done in software.
    std::uint32_t v1_instr_per_synapse = 12;
    /// V2: scalar instructions to fetch, decode and issue one NPE
    /// instruction (one each).
    std::uint32_t dispatch_instr_per_npe_instr = 3;
    /// V3: scalar instructions to program the loop controller per group.
    std::uint32_t v3_setup_instr = 12;
    /// V3: loop-controller steps per NPE instruction issued.
    std::uint32_t loopctrl_per_npe_instr = 1;
    /// Scalar instructions to pop and decode one incoming packet.
    std::uint32_t packet_decode_instr = 2;
    /// V1: scalar instructions per neuron in the threshold scan.
    std::uint32_t v1_threshold_instr_per_neuron = 4;
    /// NPE instructions per vector chunk in the threshold scan
    /// (load, compare/rectify, store).
    std::uint32_t threshold_npe_instr_per_chunk = 3;
    /// Scalar instructions to assemble and inject one output spike.
    std::uint32_t emit_instr_per_spike = 3;
    /// Scalar instructions to file one input event into a line buffer.
    std::uint32_t line_buffer_store_instr = 6;
};

/// NPE instructions for one vector chunk of a group of `group` events:
/// load states, per event load weights and accumulate, store states.
std::uint64_t npe_instructions_per_chunk(std::uint64_t group);

/// Control-side counts (riscv_instr, imem_fetch, loopctrl_step) for one event
/// group of `group` packets updating `n_out` neurons.
CostCounters event_control_cost(const CoreVariant &variant,
        std::uint64_t n_out, std::uint64_t group,
        const ControlConstants &k = {});

/// Control-side counts for a threshold scan over n neurons.
CostCounters threshold_control_cost(const CoreVariant &variant,
        std::uint64_t n, const ControlConstants &k = {});

struct MemoryRegion
{
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// One core: its memories, variant and counters. Weight memory holds the
/// dequantized bf16 value of every stored synapse; its word footprint is
/// tracked separately because low-precision schemes pack several per word.
class CoreState
{
public:
    CoreState(CoreId id, CoreVariant variant, std::uint64_t capacity_words);

    CoreId id() const { return id_; }
    const CoreVariant &variant() const { return variant_; }
    std::uint64_t capacity_words() const { return capacity_words_; }

    /// Allocations throw CapacityError once static words exceed capacity.
    MemoryRegion allocate_weights(std::size_t values, std::uint64_t words);
    MemoryRegion allocate_states(std::size_t count);
    void reserve_static_words(std::uint64_t words);

    std::vector<Bf16> &weight_memory() { return weights_; }
    const std::vector<Bf16> &weight_memory() const { return weights_; }
    std::vector<Bf16> &state_memory() { return states_; }
    const std::vector<Bf16> &state_memory() const { return states_; }

    void account(OpClass op, std::uint64_t n) { counters_.account(op, n); }
    void account(const CostCounters &delta) { counters_ += delta; }
    const CostCounters &counters() const { return counters_; }

    std::uint64_t static_words() const { return static_words_; }

    /// Dynamic (line-buffer) occupancy, tracked for the peak.
    void set_dynamic_words(std::uint64_t words);
    std::uint64_t dynamic_words() const { return dynamic_words_; }
    std::uint64_t peak_dynamic_words() const { return peak_dynamic_words_; }
    std::uint64_t peak_words() const
    {
        return static_words_ + peak_dynamic_words_;
    }

    Cycle busy_until = 0;
    Cycle busy_cycles = 0;
    Cycle stall_cycles = 0;
    std::uint64_t synaptic_ops = 0;

private:
    /// Throws CapacityError past the capacity.
    void grow_static(std::uint64_t words);

    CoreId id_;
    CoreVariant variant_;
    std::uint64_t capacity_words_;
    std::vector<Bf16> weights_;
    std::vector<Bf16> states_;
    CostCounters counters_;
    std::uint64_t static_words_ = 0;
    std::uint64_t dynamic_words_ = 0;
    std::uint64_t peak_dynamic_words_ = 0;
};

} // namespace nmsim

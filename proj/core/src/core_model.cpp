#include "nmsim/core_model.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::string_view to_string(OpClass op)
{
    switch (op)
    {
    case OpClass::riscv_instr:
        return "riscv_instr";
    case OpClass::imem_fetch:
        return "imem_fetch";
    case OpClass::dmem_read_word:
        return "dmem_read_word";
    case OpClass::dmem_write_word:
        return "dmem_write_word";
    case OpClass::npe_op:
        return "npe_op";
    case OpClass::loopctrl_step:
        return "loopctrl_step";
    case OpClass::noc_hop:
        return "noc_hop";
    case OpClass::packet_inject:
        return "packet_inject";
    }
    return "?";
}

OpClass parse_op_class(std::string_view text)
{
    for (OpClass op : kAllOpClasses)
    {
        if (to_string(op) == text)
        {
            return op;
        }
    }
    throw ConfigError(fmt::format("unknown op class '{}'", text));
}

bool CostCounters::all_zero() const
{
    return std::all_of(counts_.begin(), counts_.end(),
            [](std::uint64_t c) { return c == 0; });
}

std::string_view to_string(VariantTag tag)
{
    switch (tag)
    {
    case VariantTag::v1:
        return "v1";
    case VariantTag::v2:
        return "v2";
    case VariantTag::v3:
        return "v3";
    }
    return "?";
}

VariantTag parse_variant(std::string_view text)
{
    if (text == "v1" || text == "V1")
    {
        return VariantTag::v1;
    }
    if (text == "v2" || text == "V2")
    {
        return VariantTag::v2;
    }
    if (text == "v3" || text == "V3")
    {
        return VariantTag::v3;
    }
    throw ConfigError(fmt::format("unknown core variant '{}'", text));
}

CoreVariant CoreVariant::make(VariantTag tag)
{
    CoreVariant v;
    v.tag = tag;
    v.npe_count = tag == VariantTag::v1 ? 0 : 8;
    return v;
}

std::uint64_t npe_instructions_per_chunk(std::uint64_t group)
{
    return 2 + 2 * group;
}

namespace {

std::uint64_t chunks(const CoreVariant &variant, std::uint64_t n)
{
    return (n + variant.npe_count - 1) / variant.npe_count;
}

void charge_scalar(CostCounters &c, std::uint64_t instr)
{
    c.account(OpClass::riscv_instr, instr);
    c.account(OpClass::imem_fetch, instr);
}

} // namespace

CostCounters event_control_cost(const CoreVariant &variant,
        std::uint64_t n_out, std::uint64_t group, const ControlConstants &k)
{
    CostCounters c;
    charge_scalar(c, k.packet_decode_instr * group);
    switch (variant.tag)
    {
    case VariantTag::v1:
        charge_scalar(c, std::uint64_t{k.v1_instr_per_synapse} * n_out * group);
        break;
    case VariantTag::v2:
        charge_scalar(c, std::uint64_t{k.dispatch_instr_per_npe_instr}
                        * chunks(variant, n_out)
                        * npe_instructions_per_chunk(group));
        break;
    case VariantTag::v3:
        charge_scalar(c, k.v3_setup_instr);
        c.account(OpClass::loopctrl_step,
                std::uint64_t{k.loopctrl_per_npe_instr} * chunks(variant, n_out)
                        * npe_instructions_per_chunk(group));
        break;
    }
    return c;
}

CostCounters threshold_control_cost(const CoreVariant &variant,
        std::uint64_t n, const ControlConstants &k)
{
    CostCounters c;
    switch (variant.tag)
    {
    case VariantTag::v1:
        charge_scalar(c, std::uint64_t{k.v1_threshold_instr_per_neuron} * n);
        break;
    case VariantTag::v2:
        charge_scalar(c, std::uint64_t{k.dispatch_instr_per_npe_instr}
                        * k.threshold_npe_instr_per_chunk * chunks(variant, n));
        break;
    case VariantTag::v3:
        charge_scalar(c, k.v3_setup_instr);
        c.account(OpClass::loopctrl_step,
                std::uint64_t{k.loopctrl_per_npe_instr}
                        * k.threshold_npe_instr_per_chunk * chunks(variant, n));
        break;
    }
    return c;
}

CoreState::CoreState(CoreId id, CoreVariant variant,
        std::uint64_t capacity_words)
        : id_(id)
        , variant_(variant)
        , capacity_words_(capacity_words)
{
    if ((variant.tag == VariantTag::v1) != (variant.npe_count == 0))
    {
        throw ConfigError(fmt::format(
                "variant {} with {} NPEs: only V1 has no NPEs",
                to_string(variant.tag), variant.npe_count));
    }
}

MemoryRegion CoreState::allocate_weights(std::size_t values,
        std::uint64_t words)
{
    MemoryRegion region{weights_.size(), values};
    grow_static(words);
    weights_.resize(weights_.size() + values);
    return region;
}

MemoryRegion CoreState::allocate_states(std::size_t count)
{
    MemoryRegion region{states_.size(), count};
    grow_static(count);
    states_.resize(states_.size() + count);
    return region;
}

void CoreState::reserve_static_words(std::uint64_t words)
{
    grow_static(words);
}

void CoreState::grow_static(std::uint64_t words)
{
    if (static_words_ + words > capacity_words_)
    {
        throw CapacityError(fmt::format("core {}: needs {} words, capacity {}", id_,
                static_words_ + words, capacity_words_));
    }
    static_words_ += words;
}

void CoreState::set_dynamic_words(std::uint64_t words)
{
    dynamic_words_ = words;
    peak_dynamic_words_ = std::max(peak_dynamic_words_, words);
}

} // namespace nmsim

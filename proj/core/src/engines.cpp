#include "nmsim/engines.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

ShardView install_shard(CoreState &core, const LayerSpec &spec,
        const QuantizedWeights &weights, const Shard &shard)
{
    if (weights.size() != spec.weight_count())
    {
        throw ConfigError(fmt::format("install_shard: {} weights for a layer of {}",
                weights.size(), spec.weight_count()));
    }
    if (shard.begin > shard.end || shard.end > spec.output_size())
    {
        throw ConfigError(fmt::format("install_shard: neurons [{}, {}) outside layer of {}",
                shard.begin, shard.end, spec.output_size()));
    }
    ShardView v;
    v.spec = &spec;
    v.shard = shard;
    const ShardFootprint f = shard_footprint(spec, shard);
    if (spec.is_conv())
    {
        v.weights = core.allocate_weights(weights.size(), f.weight_words);
        std::copy(weights.values.begin(), weights.values.end(),
                core.weight_memory().begin() + v.weights.offset);
        if (spec.style == ExecutionStyle::stateful)
        {
            v.states = core.allocate_states(f.state_words);
        }
        return v;
    }
    const std::uint32_t n_in = spec.dense().n_in;
    const std::uint32_t n_layer = spec.dense().n_out;
    const std::uint32_t n = shard.size();
    v.weights = core.allocate_weights(std::size_t{n_in} * n, f.weight_words);
    auto dst = core.weight_memory().begin() + v.weights.offset;
    for (std::uint32_t i = 0; i < n_in; ++i)
    {
        const auto row = weights.values.begin() + std::size_t{i} * n_layer;
        std::copy(row + shard.begin, row + shard.end, dst + std::size_t{i} * n);
    }
    v.states = core.allocate_states(n);
    return v;
}

CostCounters dense_group_counters(const CoreVariant &variant,
        const LayerSpec &spec, std::uint32_t n_out, std::uint64_t group,
        std::uint64_t graded_packets, const ControlConstants &k)
{
    CostCounters c = event_control_cost(variant, n_out, group, k);
    c.account(OpClass::dmem_read_word,
            group * dense_row_words(spec, n_out) + n_out);
    c.account(OpClass::dmem_write_word, n_out);
    if (variant.has_npes())
    {
        c.account(OpClass::npe_op,
                std::uint64_t{n_out} * (group + graded_packets));
    }
    return c;
}

namespace {

void check_dense_packet(const ShardView &view, const SpikePacket &pkt)
{
    if (pkt.neuron_index >= view.spec->dense().n_in)
    {
        throw RoutingFault(fmt::format(
                "no weight row for neuron {} of label {} (layer has {} inputs)",
                pkt.neuron_index, pkt.label, view.spec->dense().n_in));
    }
}

} // namespace

CostCounters process_dense_event(CoreState &core, const ShardView &view,
        const SpikePacket &pkt, const ControlConstants &k)
{
    return process_dense_group(core, view, std::span(&pkt, 1), k);
}

CostCounters process_dense_group(CoreState &core, const ShardView &view,
        std::span<const SpikePacket> pkts, const ControlConstants &k)
{
    if (pkts.empty())
    {
        return {};
    }
    std::uint64_t graded = 0;
    for (const SpikePacket &p : pkts)
    {
        if (p.label != pkts.front().label)
        {
            throw RoutingFault(fmt::format(
                    "spike group mixes labels {} and {}", pkts.front().label,
                    p.label));
        }
        check_dense_packet(view, p);
        graded += p.binary() ? 0 : 1;
    }
    const std::uint32_t n = view.shard.size();
    const Bf16 *weights = core.weight_memory().data() + view.weights.offset;
    Bf16 *states = core.state_memory().data() + view.states.offset;
    for (std::uint32_t j = 0; j < n; ++j)
    {
        Bf16 s = states[j];
        for (const SpikePacket &p : pkts)
        {
            s = neuron_update(s, weights[std::size_t{p.neuron_index} * n + j],
                    p.value);
        }
        states[j] = s;
    }
    core.synaptic_ops += std::uint64_t{n} * pkts.size();
    const CostCounters c = dense_group_counters(
            core.variant(), *view.spec, n, pkts.size(), graded, k);
    core.account(c);
    return c;
}

CostCounters process_conv_event(CoreState &core, const ShardView &view,
        const SpikePacket &pkt, const ControlConstants &k)
{
    const ConvShape &c = view.spec->conv();
    if (pkt.neuron_index >= view.spec->input_size())
    {
        throw RoutingFault(fmt::format(
                "conv input index {} out of range for label {}",
                pkt.neuron_index, pkt.label));
    }
    const std::uint32_t ci = pkt.neuron_index % c.c_in;
    const std::uint32_t pix = pkt.neuron_index / c.c_in;
    const std::uint32_t y = pix / c.w, x = pix % c.w;
    const Bf16 *weights = core.weight_memory().data() + view.weights.offset;
    Bf16 *states = core.state_memory().data() + view.states.offset;
    const std::uint32_t ow = c.out_w();

    std::uint64_t positions = 0;
    for (std::uint32_t ky = 0; ky < c.k; ++ky)
    {
        if (y < ky || (y - ky) % c.stride != 0)
        {
            continue;
        }
        const std::uint32_t oy = (y - ky) / c.stride;
        if (oy >= c.out_h())
        {
            continue;
        }
        for (std::uint32_t kx = 0; kx < c.k; ++kx)
        {
            if (x < kx || (x - kx) % c.stride != 0)
            {
                continue;
            }
            const std::uint32_t ox = (x - kx) / c.stride;
            if (ox >= ow)
            {
                continue;
            }
            ++positions;
            const Bf16 *wrow =
                    weights + ((std::size_t{ky} * c.k + kx) * c.c_in + ci) * c.c_out;
            Bf16 *srow = states + (std::size_t{oy} * ow + ox) * c.c_out;
            for (std::uint32_t co = 0; co < c.c_out; ++co)
            {
                srow[co] = neuron_update(srow[co], wrow[co], pkt.value);
            }
        }
    }
    const std::uint64_t touched = positions * c.c_out;
    CostCounters cost = event_control_cost(core.variant(), touched, 1, k);
    cost.account(OpClass::dmem_read_word,
            positions * weight_words(view.spec->weight_scheme, c.c_out) + touched);
    cost.account(OpClass::dmem_write_word, touched);
    if (core.variant().has_npes())
    {
        cost.account(OpClass::npe_op, touched * (pkt.binary() ? 1 : 2));
    }
    core.synaptic_ops += touched;
    core.account(cost);
    return cost;
}

ThresholdResult threshold_shard(CoreState &core, const ShardView &view,
        const ControlConstants &k)
{
    ThresholdResult r;
    const std::uint64_t n = view.states.size;
    Bf16 *states = core.state_memory().data() + view.states.offset;
    r.states.assign(states, states + n);
    for (std::uint64_t j = 0; j < n; ++j)
    {
        const FireResult f = threshold_fire(states[j], *view.spec);
        if (f.fired)
        {
            r.spikes.emplace_back(
                    view.shard.begin + static_cast<std::uint32_t>(j), f.value);
        }
        states[j] = Bf16{};
    }
    r.cost = threshold_control_cost(core.variant(), n, k);
    r.cost.account(OpClass::dmem_read_word, n);
    r.cost.account(OpClass::dmem_write_word, n);
    if (core.variant().has_npes())
    {
        r.cost.account(OpClass::npe_op, n);
    }
    core.account(r.cost);
    return r;
}

CostCounters emit_counters(const ControlConstants &k)
{
    CostCounters c;
    c.account(OpClass::riscv_instr, k.emit_instr_per_spike);
    c.account(OpClass::imem_fetch, k.emit_instr_per_spike);
    c.account(OpClass::packet_inject, 1);
    return c;
}

GroupBuffer::GroupBuffer(std::uint32_t capacity)
        : capacity_(capacity)
{
    if (capacity == 0)
    {
        throw ConfigError("group size must be at least 1");
    }
}

std::optional<std::vector<SpikePacket>> GroupBuffer::push(
        const SpikePacket &pkt)
{
    if (!pending_.empty() && pending_.front().label != pkt.label)
    {
        throw RoutingFault(fmt::format(
                "group buffer holds label {}, got label {}",
                pending_.front().label, pkt.label));
    }
    pending_.push_back(pkt);
    if (pending_.size() >= capacity_)
    {
        return flush();
    }
    return std::nullopt;
}

std::vector<SpikePacket> GroupBuffer::flush()
{
    std::vector<SpikePacket> out;
    out.swap(pending_);
    return out;
}

} // namespace nmsim

#include "nmsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "nmsim/engines.hpp"
#include "nmsim/error.hpp"
#include "nmsim/events.hpp"
#include "nmsim/line_buffer.hpp"
#include "nmsim/noc.hpp"

namespace nmsim {

Stimulus stimulus_from_vector(std::span<const Bf16> activations,
        SpikeMode mode)
{
    Stimulus s;
    for (std::size_t i = 0; i < activations.size(); ++i)
    {
        if (activations[i].is_zero())
        {
            continue;
        }
        InputEvent ev{static_cast<std::uint32_t>(i), std::nullopt};
        if (mode == SpikeMode::graded)
        {
            ev.value = activations[i];
        }
        s.push_back(ev);
    }
    return s;
}

std::vector<Bf16> stimulus_to_vector(const Stimulus &s, std::uint32_t size)
{
    std::vector<Bf16> v(size);
    for (const InputEvent &ev : s)
    {
        v.at(ev.index) = ev.value ? *ev.value : Bf16::from_float(1.0f);
    }
    return v;
}

namespace {

struct ShardRuntime
{
    std::size_t layer = 0;
    ShardView view;
    GroupBuffer buffer;
    std::unique_ptr<LineBuffer> line;
    std::uint64_t received = 0;
    std::uint32_t boundaries = 0;
    std::uint32_t expected = 0;
};

struct CoreRuntime
{
    CoreState state;
    std::vector<ShardRuntime> shards;
    std::uint64_t received = 0;
};

class Engine
{
public:
    Engine(const Network &net, const Mapping &mapping, const SimOptions &opts)
            : net_(net)
            , mapping_(mapping)
            , opts_(opts)
            , topo_(mapping.topology())
            , tables_(generate_routing_tables(mapping, topo_))
    {
        net.validate();
        opts.table.validate();
        if (mapping.layers.size() != net.spec.layers.size())
        {
            throw ConfigError(fmt::format(
                    "mapping covers {} layers, network has {}",
                    mapping.layers.size(), net.spec.layers.size()));
        }
        const double hop = std::ceil(opts.table.cycle(OpClass::noc_hop) - 1e-9);
        hop_latency_ = std::max<Cycle>(1, static_cast<Cycle>(hop));

        const CoreVariant variant = CoreVariant::make(opts.variant);
        for (CoreId c = 0; c < topo_.router_count(); ++c)
        {
            cores_.push_back(std::make_unique<CoreRuntime>(CoreRuntime{
                    CoreState(c, variant, mapping.capacity_words), {}, 0}));
            cores_.back()->state.reserve_static_words(tables_[c].size());
        }
        for (std::size_t i = 0; i < mapping.layers.size(); ++i)
        {
            const LayerSpec &spec = net.spec.layers[i];
            const auto expected = static_cast<std::uint32_t>(
                    mapping.label_sources(static_cast<LayerId>(i)).size());
            for (const Shard &s : mapping.layers[i])
            {
                CoreRuntime &core = *cores_.at(s.core);
                for (const ShardRuntime &other : core.shards)
                {
                    if (other.layer == i)
                    {
                        throw ConfigError(fmt::format(
                                "layer {} has two shards on core {}", i, s.core));
                    }
                }
                ShardRuntime rt{i,
                        install_shard(core.state, spec, net.weights[i], s),
                        GroupBuffer(opts.group), nullptr, 0, 0, expected};
                core.shards.push_back(std::move(rt));
            }
        }
        // Line buffers view weight memory, which is final only now.
        for (auto &core : cores_)
        {
            for (ShardRuntime &rt : core->shards)
            {
                const LayerSpec &spec = net.spec.layers[rt.layer];
                if (spec.is_conv() && spec.style == ExecutionStyle::depth_first)
                {
                    const auto &mem = core->state.weight_memory();
                    rt.line = std::make_unique<LineBuffer>(spec,
                            std::span<const Bf16>(mem.data() + rt.view.weights.offset,
                                    rt.view.weights.size),
                            variant, opts.control);
                }
            }
        }
    }

    SimResult run(std::span<const Stimulus> steps)
    {
        for (const Stimulus &s : steps)
        {
            run_step(s);
        }
        return finish();
    }

private:
    void run_step(const Stimulus &stim)
    {
        StepRecord rec;
        for (const LayerSpec &l : net_.spec.layers)
        {
            rec.outputs.emplace_back(l.output_size());
            rec.states.emplace_back(l.is_conv() && l.style == ExecutionStyle::depth_first
                            ? 0
                            : l.output_size());
            rec.spikes.push_back(0);
        }
        step_ = &result_.steps.emplace_back(std::move(rec));

        Cycle t0 = queue_.now();
        for (const auto &core : cores_)
        {
            t0 = std::max(t0, core->state.busy_until);
        }
        const SourceLayer input = net_.spec.source_layer(kInputLabel);
        pending_injections_ = stim.size();
        for (const InputEvent &ev : stim)
        {
            queue_.schedule(t0, ExternalInjection{
                                        make_spike(input, ev.index, ev.value, t0)});
        }
        if (stim.empty())
        {
            send_boundary(mapping_.input_core, kInputLabel, t0);
        }
        while (auto ev = queue_.next_event())
        {
            if (opts_.record_trace)
            {
                result_.trace.push_back(describe(*ev));
            }
            std::visit([&](const auto &p) { handle(p, ev->time); }, ev->payload);
        }
        for (const auto &core : cores_)
        {
            for (const ShardRuntime &rt : core->shards)
            {
                if (!rt.buffer.empty() || rt.boundaries != 0)
                {
                    throw CausalityError(fmt::format(
                            "layer {} on core {} did not complete the step",
                            rt.layer, core->state.id()));
                }
            }
        }
    }

    void handle(const ExternalInjection &inj, Cycle t)
    {
        CoreState &src = cores_.at(mapping_.input_core)->state;
        src.account(OpClass::packet_inject, 1);
        ++result_.input_events;
        route(src, inj.packet);
        if (--pending_injections_ == 0)
        {
            send_boundary(mapping_.input_core, kInputLabel, t);
        }
    }

    void handle(const PacketArrival &arr, Cycle t)
    {
        CoreRuntime &core = *cores_.at(arr.core);
        ++core.received;
        ++result_.packets_delivered;
        for (ShardRuntime &rt : core.shards)
        {
            if (rt.layer != arr.packet.label)
            {
                continue;
            }
            ++rt.received;
            const LayerSpec &spec = *rt.view.spec;
            if (rt.line)
            {
                const ConvShape &c = spec.conv();
                const auto outs = rt.line->push(pixel_from_index(
                        arr.packet.neuron_index, c.w, c.c_in, arr.packet.value));
                core.state.set_dynamic_words(rt.line->last_high_water());
                core.state.set_dynamic_words(rt.line->words());
                const CostCounters cost = rt.line->take_cost();
                core.state.account(cost);
                core.state.synaptic_ops += rt.line->take_synaptic_ops();
                emit_pixels(core, rt, outs, work(core, rt, cost, !outs.empty(), t));
            }
            else if (spec.is_conv())
            {
                const CostCounters cost =
                        process_conv_event(core.state, rt.view, arr.packet, opts_.control);
                work(core, rt, cost, true, t);
            }
            else if (auto group = rt.buffer.push(arr.packet))
            {
                const CostCounters cost = process_dense_group(
                        core.state, rt.view, *group, opts_.control);
                work(core, rt, cost, true, t);
            }
        }
    }

    void handle(const StepBoundary &b, Cycle t)
    {
        CoreRuntime &core = *cores_.at(b.core);
        for (ShardRuntime &rt : core.shards)
        {
            if (rt.layer != b.label)
            {
                continue;
            }
            if (++rt.boundaries == rt.expected)
            {
                finalize(core, rt, t);
            }
        }
    }

    void handle(const ComputeCompletion &, Cycle) {}

    void finalize(CoreRuntime &core, ShardRuntime &rt, Cycle t)
    {
        Cycle end = t;
        if (!rt.buffer.empty())
        {
            const auto group = rt.buffer.flush();
            const CostCounters cost =
                    process_dense_group(core.state, rt.view, group, opts_.control);
            end = work(core, rt, cost, true, end);
        }
        if (rt.received > 0)
        {
            if (rt.line)
            {
                const auto outs = rt.line->finish();
                const CostCounters cost = rt.line->take_cost();
                core.state.account(cost);
                core.state.synaptic_ops += rt.line->take_synaptic_ops();
                core.state.set_dynamic_words(0);
                end = work(core, rt, cost, !outs.empty(), end);
                end = emit_pixels(core, rt, outs, end);
            }
            else
            {
                ThresholdResult tr = threshold_shard(core.state, rt.view, opts_.control);
                auto &states = step_->states[rt.layer];
                std::copy(tr.states.begin(), tr.states.end(),
                        states.begin() + rt.view.shard.begin);
                end = work(core, rt, tr.cost, true, end);
                for (const auto &[index, value] : tr.spikes)
                {
                    end = emit(core, rt, index, value, end);
                }
            }
        }
        rt.received = 0;
        rt.boundaries = 0;
        send_boundary(core.state.id(), output_label(rt.layer),
                std::max(end, core.state.busy_until));
    }

    Cycle emit_pixels(CoreRuntime &core, ShardRuntime &rt,
            const std::vector<PixelEvent> &outs, Cycle t)
    {
        const ConvShape &c = rt.view.spec->conv();
        for (const PixelEvent &p : outs)
        {
            const auto index = (p.y * c.out_w() + p.x) * c.c_out + p.c;
            t = emit(core, rt, index, p.value, t);
        }
        return t;
    }

    Cycle emit(CoreRuntime &core, ShardRuntime &rt, std::uint32_t index,
            std::optional<Bf16> value, Cycle t)
    {
        const CostCounters cost = emit_counters(opts_.control);
        core.state.account(cost);
        const Cycle end = work(core, rt, cost, false, t);
        const LayerId label = output_label(rt.layer);
        const SpikePacket pkt =
                make_spike(net_.spec.source_layer(label), index, value, end);
        ++result_.packets_emitted;
        ++step_->spikes[rt.layer];
        step_->outputs[rt.layer].at(index) =
                value ? *value : Bf16::from_float(1.0f);
        if (label < net_.spec.layers.size())
        {
            route(core.state, pkt);
        }
        return end;
    }

    void route(CoreState &src, const SpikePacket &pkt)
    {
        const DeliveryTrace tr =
                deliver(topo_, tables_, pkt, src.id(), hop_latency_);
        src.account(OpClass::noc_hop, tr.link_traversals);
        result_.link_traversals += tr.link_traversals;
        for (const Delivery &d : tr.destinations)
        {
            queue_.schedule(d.arrival, PacketArrival{d.core, pkt});
        }
    }

    void send_boundary(CoreId src, LayerId label, Cycle t)
    {
        if (mapping_.label_destinations(label).empty())
        {
            return;
        }
        SpikePacket marker;
        marker.label = label;
        marker.timestamp = t;
        const DeliveryTrace tr = deliver(topo_, tables_, marker, src, hop_latency_);
        for (const Delivery &d : tr.destinations)
        {
            queue_.schedule(d.arrival, StepBoundary{d.core, label});
        }
    }

    /// Serial occupancy of the core; NPE sequences add the pipeline drain.
    Cycle work(CoreRuntime &core, const ShardRuntime &rt,
            const CostCounters &cost, bool npe_sequence, Cycle t)
    {
        CoreState &cs = core.state;
        const Cycle start = std::max(t, cs.busy_until);
        Cycle cycles = work_cycles(cost, opts_.table);
        if (npe_sequence && cs.variant().has_npes())
        {
            cycles += cs.variant().npe_pipeline_depth;
            cs.stall_cycles += cs.variant().npe_pipeline_depth;
        }
        cs.busy_until = start + cycles;
        cs.busy_cycles += cycles;
        queue_.schedule(cs.busy_until,
                ComputeCompletion{cs.id(), static_cast<std::uint32_t>(rt.layer)});
        return cs.busy_until;
    }

    SimResult finish()
    {
        for (const auto &core : cores_)
        {
            const CoreState &cs = core->state;
            CoreReport r;
            r.core = cs.id();
            r.counters = cs.counters();
            r.energy_uj = evaluate(cs.counters(), opts_.table).energy_uj;
            r.busy_cycles = cs.busy_cycles;
            r.stall_cycles = cs.stall_cycles;
            r.finish = cs.busy_until;
            r.static_words = cs.static_words();
            r.peak_words = cs.peak_words();
            r.packets_received = core->received;
            r.synaptic_ops = cs.synaptic_ops;
            result_.totals += cs.counters();
            result_.synaptic_ops += cs.synaptic_ops;
            result_.makespan = std::max(result_.makespan, cs.busy_until);
            result_.cores.push_back(r);
        }
        return std::move(result_);
    }

    const Network &net_;
    const Mapping &mapping_;
    const SimOptions &opts_;
    MeshTopology topo_;
    RoutingTables tables_;
    Cycle hop_latency_ = 1;
    std::vector<std::unique_ptr<CoreRuntime>> cores_;
    EventQueue queue_;
    std::size_t pending_injections_ = 0;
    StepRecord *step_ = nullptr;
    SimResult result_;
};

} // namespace

SimResult simulate(const Network &net, const Mapping &mapping,
        const SimOptions &opts, std::span<const Stimulus> steps)
{
    Engine engine(net, mapping, opts);
    return engine.run(steps);
}

} // namespace nmsim

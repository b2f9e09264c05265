#include "nmsim/events.hpp"

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::string_view to_string(SpikeMode mode)
{
    return mode == SpikeMode::binary ? "binary" : "graded";
}

SpikeMode parse_spike_mode(std::string_view text)
{
    if (text == "binary")
    {
        return SpikeMode::binary;
    }
    if (text == "graded")
    {
        return SpikeMode::graded;
    }
    throw ConfigError(fmt::format("unknown spike mode '{}'", text));
}

SpikePacket make_spike(const SourceLayer &layer, std::uint32_t index,
        std::optional<Bf16> value, Cycle t)
{
    if (index >= layer.size)
    {
        throw ConfigError(fmt::format(
                "neuron index {} out of range for layer {} of size {}", index,
                layer.label, layer.size));
    }
    if (layer.mode == SpikeMode::binary && value.has_value())
    {
        throw ConfigError(fmt::format(
                "graded value supplied for binary layer {}", layer.label));
    }
    if (layer.mode == SpikeMode::graded && !value.has_value())
    {
        throw ConfigError(fmt::format(
                "graded layer {} requires a spike value", layer.label));
    }
    return SpikePacket{layer.label, index, value, t};
}

std::vector<SpikePacket> spikes_from_activations(const SourceLayer &layer,
        std::span<const Bf16> activations, Cycle t)
{
    std::vector<SpikePacket> packets;
    for (std::uint32_t i = 0; i < activations.size(); ++i)
    {
        if (activations[i].is_zero())
        {
            continue;
        }
        std::optional<Bf16> value;
        if (layer.mode == SpikeMode::graded)
        {
            value = activations[i];
        }
        packets.push_back(make_spike(layer, i, value, t));
    }
    return packets;
}

std::string describe(const ScheduledEvent &ev)
{
    struct Visitor
    {
        const ScheduledEvent &ev;
        std::string operator()(const PacketArrival &p) const
        {
            return fmt::format("{} {} arrive core={} label={} idx={} val={:04x}",
                    ev.time, ev.sequence, p.core, p.packet.label,
                    p.packet.neuron_index,
                    p.packet.value ? p.packet.value->bits() : 0u);
        }
        std::string operator()(const ComputeCompletion &c) const
        {
            return fmt::format("{} {} complete core={} shard={}", ev.time,
                    ev.sequence, c.core, c.shard);
        }
        std::string operator()(const ExternalInjection &i) const
        {
            return fmt::format("{} {} inject idx={} val={:04x}", ev.time,
                    ev.sequence, i.packet.neuron_index,
                    i.packet.value ? i.packet.value->bits() : 0u);
        }
        std::string operator()(const StepBoundary &b) const
        {
            return fmt::format("{} {} boundary core={} label={}", ev.time,
                    ev.sequence, b.core, b.label);
        }
    };
    return std::visit(Visitor{ev}, ev.payload);
}

std::uint64_t EventQueue::schedule(Cycle time, EventPayload payload)
{
    if (time < now_)
    {
        throw CausalityError(fmt::format(
                "event scheduled at t={} before current time t={}", time,
                now_));
    }
    const std::uint64_t seq = next_sequence_++;
    heap_.push(ScheduledEvent{time, seq, std::move(payload)});
    return seq;
}

std::optional<ScheduledEvent> EventQueue::next_event()
{
    if (heap_.empty())
    {
        return std::nullopt;
    }
    ScheduledEvent ev = heap_.top();
    heap_.pop();
    now_ = ev.time;
    return ev;
}

} // namespace nmsim

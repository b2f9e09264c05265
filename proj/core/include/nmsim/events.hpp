#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nmsim/bf16.hpp"
#include "nmsim/types.hpp"

namespace nmsim {

/// AER spike packet. The label names the source layer; the optional value
/// is present only for graded spikes.
struct SpikePacket
{
    LayerId label = 0;
    std::uint32_t neuron_index = 0;
    std::optional<Bf16> value;
    Cycle timestamp = 0;

    bool binary() const { return !value.has_value(); }

    friend bool operator==(const SpikePacket &, const SpikePacket &) = default;
};

/// What a packet factory needs to know about the layer it speaks for.
struct SourceLayer
{
    LayerId label = 0;
    std::uint32_t size = 0;
    SpikeMode mode = SpikeMode::graded;
};

SpikePacket make_spike(const SourceLayer &layer, std::uint32_t index,
        std::optional<Bf16> value, Cycle t);

/// One packet per non-zero activation, in ascending index order.
std::vector<SpikePacket> spikes_from_activations(const SourceLayer &layer,
        std::span<const Bf16> activations, Cycle t);

struct PacketArrival
{
    CoreId core = 0;
    SpikePacket packet;
};

struct ComputeCompletion
{
    CoreId core = 0;
    std::uint32_t shard = 0;
};

struct ExternalInjection
{
    SpikePacket packet;
};

/// End-of-step marker from one source core for one label. Not charged to any
/// cost counter; it stands in for the per-inference synchronisation.
struct StepBoundary
{
    CoreId core = 0;
    LayerId label = 0;
};

using EventPayload = std::variant<PacketArrival, ComputeCompletion,
        ExternalInjection, StepBoundary>;

struct ScheduledEvent
{
    Cycle time = 0;
    std::uint64_t sequence = 0;
    EventPayload payload;
};

std::string describe(const ScheduledEvent &ev);

/// Min-queue over (time, sequence). Sequence numbers are assigned from a
/// global insertion counter, so dequeue order is total and independent of
/// which core produced an event.
class EventQueue
{
public:
    /// Throws CausalityError if time precedes the current clock.
    std::uint64_t schedule(Cycle time, EventPayload payload);

    std::optional<ScheduledEvent> next_event();

    Cycle now() const { return now_; }
    std::size_t size() const { return heap_.size(); }
    bool empty() const { return heap_.empty(); }
    std::uint64_t scheduled_count() const { return next_sequence_; }

private:
    struct Later
    {
        bool operator()(const ScheduledEvent &a, const ScheduledEvent &b) const
        {
            if (a.time != b.time)
            {
                return a.time > b.time;
            }
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<ScheduledEvent, std::vector<ScheduledEvent>, Later>
            heap_;
    Cycle now_ = 0;
    std::uint64_t next_sequence_ = 0;
};

} // namespace nmsim

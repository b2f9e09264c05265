#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nmsim/core_model.hpp"
#include "nmsim/events.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/netmodel.hpp"

namespace nmsim {

/// A layer shard installed on a core: where its weights and states live.
/// Dense weights are stored row-major, one row of shard.size() values per
/// input neuron. Conv kernels are stored whole as {k, k, c_in, c_out}.
struct ShardView
{
    const LayerSpec *spec = nullptr;
    Shard shard;
    MemoryRegion weights;
    MemoryRegion states;
};

/// Copies the shard's weights into core memory and allocates its states.
ShardView install_shard(CoreState &core, const LayerSpec &spec,
        const QuantizedWeights &weights, const Shard &shard);

/// Counter delta for one group of `group` packets into a dense shard of
/// n_out neurons: weights read per packet, states read and written once.
CostCounters dense_group_counters(const CoreVariant &variant,
        const LayerSpec &spec, std::uint32_t n_out, std::uint64_t group,
        std::uint64_t graded_packets, const ControlConstants &k = {});

/// Integrates one packet into every neuron of the shard. Emission happens
/// later, in the threshold phase. Returns the counters charged.
CostCounters process_dense_event(CoreState &core, const ShardView &view,
        const SpikePacket &pkt, const ControlConstants &k = {});

/// Same final states as applying process_dense_event to each packet in
/// order; states are read and written once for the whole group.
CostCounters process_dense_group(CoreState &core, const ShardView &view,
        std::span<const SpikePacket> pkts, const ControlConstants &k = {});

/// Scatter update of a stateful conv layer for one input pixel event.
CostCounters process_conv_event(CoreState &core, const ShardView &view,
        const SpikePacket &pkt, const ControlConstants &k = {});

struct ThresholdResult
{
    CostCounters cost;
    std::vector<Bf16> states; // snapshot before firing, shard order
    /// (neuron index in the layer, graded value) in ascending index.
    std::vector<std::pair<std::uint32_t, std::optional<Bf16>>> spikes;
};

/// Fires every neuron of the shard and resets all states to zero for the
/// next inference step. Emission cost is not included.
ThresholdResult threshold_shard(CoreState &core, const ShardView &view,
        const ControlConstants &k = {});

/// Scalar work to assemble and inject one output spike.
CostCounters emit_counters(const ControlConstants &k = {});

/// Pending packets for one destination layer shard.
class GroupBuffer
{
public:
    explicit GroupBuffer(std::uint32_t capacity = 4);

    /// Returns the full group once capacity is reached. Throws RoutingFault
    /// if the packet's label differs from the pending ones.
    std::optional<std::vector<SpikePacket>> push(const SpikePacket &pkt);
    std::vector<SpikePacket> flush();

    std::size_t size() const { return pending_.size(); }
    std::uint32_t capacity() const { return capacity_; }
    bool empty() const { return pending_.empty(); }

private:
    std::uint32_t capacity_;
    std::vector<SpikePacket> pending_;
};

} // namespace nmsim

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nmsim/netmodel.hpp"
#include "nmsim/noc.hpp"

namespace nmsim {

inline constexpr std::uint64_t kDefaultCapacityWords = 131072;

enum class MappingPolicy : std::uint8_t { one_layer_per_core, balanced_split };

std::string_view to_string(MappingPolicy policy);
MappingPolicy parse_mapping_policy(std::string_view text);

/// Output neurons [begin, end) of one layer hosted on one core.
struct Shard
{
    CoreId core = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    std::uint32_t size() const { return end - begin; }
    friend bool operator==(const Shard &, const Shard &) = default;
};

struct Mapping
{
    MappingPolicy policy = MappingPolicy::one_layer_per_core;
    std::uint32_t mesh_width = 1;
    std::uint32_t mesh_height = 1;
    std::uint64_t capacity_words = kDefaultCapacityWords;
    /// Router where external input packets enter the mesh.
    CoreId input_core = 0;
    std::vector<std::vector<Shard>> layers;

    MeshTopology topology() const { return {mesh_width, mesh_height}; }
    /// Ascending, unique.
    std::vector<CoreId> cores_of(std::size_t layer) const;
    /// Cores that emit packets with this label.
    std::vector<CoreId> label_sources(LayerId label) const;
    /// Cores consuming this label; empty for the network output label.
    std::vector<CoreId> label_destinations(LayerId label) const;

    friend bool operator==(const Mapping &, const Mapping &) = default;
};

/// Layer i on core i (one-layer-per-core), or output neurons of each layer
/// split evenly over max(1, cores / layers) cores (balanced-split; conv
/// layers stay whole). Throws ConfigError when one-layer-per-core has more
/// layers than cores and CapacityError when a core overflows.
Mapping assign_layers(const NetworkSpec &net, const MeshTopology &topo,
        MappingPolicy policy,
        std::uint64_t capacity_words = kDefaultCapacityWords);

/// Union of X-then-Y paths from every source core of a label to every core
/// consuming it. The output set at a router depends only on (router, input
/// port, destination set), so trees of several sources sharing a label agree.
RoutingTables generate_routing_tables(const Mapping &mapping,
        const MeshTopology &topo);

/// Words a shard of a layer occupies: weights and neuron states (stateful),
/// or weights and the line buffer bound (depth-first conv).
struct ShardFootprint
{
    std::uint64_t weight_words = 0;
    std::uint64_t state_words = 0;
};

ShardFootprint shard_footprint(const LayerSpec &layer, const Shard &shard);

/// Words per row of a dense weight shard (a row is one input neuron).
std::uint64_t dense_row_words(const LayerSpec &layer, std::uint32_t n_out);

struct CoreFootprint
{
    CoreId core = 0;
    std::uint64_t weight_words = 0;
    std::uint64_t state_words = 0;
    std::uint64_t routing_words = 0;

    std::uint64_t total() const
    {
        return weight_words + state_words + routing_words;
    }
};

struct FootprintReport
{
    std::uint64_t capacity_words = 0;
    std::vector<CoreFootprint> cores; // one per router, ascending id

    bool overflow() const;
    /// First core whose total exceeds capacity, if any.
    const CoreFootprint *first_overflow() const;
};

FootprintReport check_capacity(const Mapping &mapping, const NetworkSpec &net);

/// Line format: `layer core_x core_y begin end`, preceded by header lines
/// `policy`, `mesh`, `capacity` and `input`.
std::string dump_mapping(const Mapping &mapping);
Mapping load_mapping(std::string_view text);

} // namespace nmsim

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nmsim/events.hpp"
#include "nmsim/types.hpp"

namespace nmsim {

enum class Port : std::uint8_t { north, south, east, west, local };

inline constexpr std::array<Port, 5> kAllPorts = {
        Port::north, Port::south, Port::east, Port::west, Port::local};

std::string_view to_string(Port port);
Port parse_port(std::string_view text);
Port opposite(Port port);

/// Small bitmask over the five router ports.
class PortSet
{
public:
    constexpr PortSet() = default;
    constexpr PortSet(std::initializer_list<Port> ports)
    {
        for (Port p : ports)
        {
            insert(p);
        }
    }

    constexpr void insert(Port p) { bits_ |= bit(p); }
    constexpr bool contains(Port p) const { return (bits_ & bit(p)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t raw() const { return bits_; }
    int size() const;

    std::vector<Port> ports() const;

    friend constexpr bool operator==(PortSet, PortSet) = default;

private:
    static constexpr std::uint8_t bit(Port p)
    {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
    }
    std::uint8_t bits_ = 0;
};

struct MeshCoord
{
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    friend bool operator==(const MeshCoord &, const MeshCoord &) = default;
};

/// 2D mesh with one router per core. Edge routers have no port toward the
/// grid boundary.
class MeshTopology
{
public:
    MeshTopology(std::uint32_t width, std::uint32_t height);

    std::uint32_t width() const { return width_; }
    std::uint32_t height() const { return height_; }
    std::uint32_t router_count() const { return width_ * height_; }

    CoreId id(MeshCoord c) const { return c.y * width_ + c.x; }
    MeshCoord coord(CoreId id) const { return {id % width_, id / width_}; }

    bool has_port(CoreId router, Port port) const;
    std::optional<CoreId> neighbor(CoreId router, Port port) const;

    /// Directed inter-router links.
    std::uint32_t link_count() const;

    std::uint32_t manhattan(CoreId a, CoreId b) const;

private:
    std::uint32_t width_;
    std::uint32_t height_;
};

MeshTopology build_topology(std::uint32_t width, std::uint32_t height);

/// Source-based routing table of one router: (input port, label) -> ports.
class RoutingTable
{
public:
    using Key = std::pair<Port, LayerId>;

    RoutingTable() = default;
    explicit RoutingTable(MeshCoord router)
            : router_(router)
    {
    }

    /// Merges ports into the entry. Rejects empty sets and bounce-back to the
    /// input port; the one exception is local -> local, which is the
    /// loopback to the core's own neurons and crosses no link.
    void add(Port in, LayerId label, PortSet outs);

    /// Throws RoutingFault naming router, port and label on a missing entry.
    PortSet route(Port in, LayerId label) const;

    std::optional<PortSet> find(Port in, LayerId label) const;

    MeshCoord router() const { return router_; }
    std::size_t size() const { return entries_.size(); }
    const std::map<Key, PortSet> &entries() const { return entries_; }

    friend bool operator==(const RoutingTable &, const RoutingTable &) = default;

private:
    MeshCoord router_;
    std::map<Key, PortSet> entries_;
};

/// Indexed by router id.
using RoutingTables = std::vector<RoutingTable>;

RoutingTables empty_tables(const MeshTopology &topo);

PortSet route_step(const RoutingTable &table, Port input_port,
        const SpikePacket &packet);

struct LinkRecord
{
    CoreId router = 0;
    Port in_port = Port::local;
    Port out_port = Port::local;
    Cycle time = 0;
};

struct Delivery
{
    CoreId core = 0;
    Cycle arrival = 0;
    std::uint32_t hops = 0;
};

struct DeliveryTrace
{
    SpikePacket packet;
    std::uint32_t link_traversals = 0;
    std::vector<Delivery> destinations; // ascending core id
    std::vector<LinkRecord> links;      // one per link traversal

    std::vector<CoreId> destination_cores() const;
};

/// Walks the routing tables from the source router. Each link traversal
/// costs hop_latency cycles. Throws RoutingFault on a missing entry, a loop,
/// or a duplicate local delivery.
DeliveryTrace deliver(const MeshTopology &topo, const RoutingTables &tables,
        const SpikePacket &packet, CoreId source, Cycle hop_latency = 1);

/// Line format: `router_x router_y in_port label -> out_port[,out_port...]`.
std::string dump_tables(const RoutingTables &tables);
RoutingTables load_tables(const MeshTopology &topo, std::string_view text);

} // namespace nmsim

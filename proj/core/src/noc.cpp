#include "nmsim/noc.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::string_view to_string(Port port)
{
    switch (port)
    {
    case Port::north:
        return "north";
    case Port::south:
        return "south";
    case Port::east:
        return "east";
    case Port::west:
        return "west";
    case Port::local:
        return "local";
    }
    return "?";
}

Port parse_port(std::string_view text)
{
    for (Port p : kAllPorts)
    {
        if (to_string(p) == text)
        {
            return p;
        }
    }
    throw ConfigError(fmt::format("unknown port '{}'", text));
}

Port opposite(Port port)
{
    switch (port)
    {
    case Port::north:
        return Port::south;
    case Port::south:
        return Port::north;
    case Port::east:
        return Port::west;
    case Port::west:
        return Port::east;
    case Port::local:
        return Port::local;
    }
    return Port::local;
}

int PortSet::size() const { return std::popcount(bits_); }

std::vector<Port> PortSet::ports() const
{
    std::vector<Port> out;
    for (Port p : kAllPorts)
    {
        if (contains(p))
        {
            out.push_back(p);
        }
    }
    return out;
}

MeshTopology::MeshTopology(std::uint32_t width, std::uint32_t height)
        : width_(width)
        , height_(height)
{
    if (width == 0 || height == 0)
    {
        throw ConfigError(fmt::format(
                "mesh dimensions must be positive, got {}x{}", width, height));
    }
}

// North is +y.
bool MeshTopology::has_port(CoreId router, Port port) const
{
    const MeshCoord c = coord(router);
    switch (port)
    {
    case Port::north:
        return c.y + 1 < height_;
    case Port::south:
        return c.y > 0;
    case Port::east:
        return c.x + 1 < width_;
    case Port::west:
        return c.x > 0;
    case Port::local:
        return true;
    }
    return false;
}

std::optional<CoreId> MeshTopology::neighbor(CoreId router, Port port) const
{
    if (port == Port::local || !has_port(router, port))
    {
        return std::nullopt;
    }
    MeshCoord c = coord(router);
    switch (port)
    {
    case Port::north:
        ++c.y;
        break;
    case Port::south:
        --c.y;
        break;
    case Port::east:
        ++c.x;
        break;
    case Port::west:
        --c.x;
        break;
    case Port::local:
        break;
    }
    return id(c);
}

std::uint32_t MeshTopology::link_count() const
{
    std::uint32_t links = 0;
    for (CoreId r = 0; r < router_count(); ++r)
    {
        for (Port p : {Port::north, Port::south, Port::east, Port::west})
        {
            links += has_port(r, p) ? 1 : 0;
        }
    }
    return links;
}

std::uint32_t MeshTopology::manhattan(CoreId a, CoreId b) const
{
    const MeshCoord ca = coord(a);
    const MeshCoord cb = coord(b);
    const auto dx = ca.x > cb.x ? ca.x - cb.x : cb.x - ca.x;
    const auto dy = ca.y > cb.y ? ca.y - cb.y : cb.y - ca.y;
    return dx + dy;
}

MeshTopology build_topology(std::uint32_t width, std::uint32_t height)
{
    return MeshTopology(width, height);
}

void RoutingTable::add(Port in, LayerId label, PortSet outs)
{
    if (outs.empty())
    {
        throw RoutingFault(fmt::format(
                "router ({},{}): empty output set for port {} label {}",
                router_.x, router_.y, to_string(in), label));
    }
    if (in != Port::local && outs.contains(in))
    {
        throw RoutingFault(fmt::format(
                "router ({},{}): entry for port {} label {} bounces back",
                router_.x, router_.y, to_string(in), label));
    }
    PortSet &entry = entries_[{in, label}];
    for (Port p : outs.ports())
    {
        entry.insert(p);
    }
}

std::optional<PortSet> RoutingTable::find(Port in, LayerId label) const
{
    auto it = entries_.find({in, label});
    if (it == entries_.end())
    {
        return std::nullopt;
    }
    return it->second;
}

PortSet RoutingTable::route(Port in, LayerId label) const
{
    if (auto outs = find(in, label))
    {
        return *outs;
    }
    throw RoutingFault(fmt::format(
            "routing fault: router ({},{}) has no entry for port {} label {}",
            router_.x, router_.y, to_string(in), label));
}

RoutingTables empty_tables(const MeshTopology &topo)
{
    RoutingTables tables;
    tables.reserve(topo.router_count());
    for (CoreId r = 0; r < topo.router_count(); ++r)
    {
        tables.emplace_back(topo.coord(r));
    }
    return tables;
}

PortSet route_step(const RoutingTable &table, Port input_port,
        const SpikePacket &packet)
{
    return table.route(input_port, packet.label);
}

std::vector<CoreId> DeliveryTrace::destination_cores() const
{
    std::vector<CoreId> cores;
    cores.reserve(destinations.size());
    for (const Delivery &d : destinations)
    {
        cores.push_back(d.core);
    }
    return cores;
}

DeliveryTrace deliver(const MeshTopology &topo, const RoutingTables &tables,
        const SpikePacket &packet, CoreId source, Cycle hop_latency)
{
    if (source >= topo.router_count() || tables.size() != topo.router_count())
    {
        throw RoutingFault(fmt::format(
                "deliver: source core {} or table set does not match mesh",
                source));
    }
    DeliveryTrace trace;
    trace.packet = packet;

    struct Visit
    {
        CoreId router;
        Port in;
        std::uint32_t hops;
    };
    std::vector<Visit> stack{{source, Port::local, 0}};
    std::set<std::pair<CoreId, Port>> visited;

    while (!stack.empty())
    {
        const Visit v = stack.back();
        stack.pop_back();
        if (!visited.insert({v.router, v.in}).second)
        {
            const MeshCoord c = topo.coord(v.router);
            throw RoutingFault(fmt::format(
                    "routing loop: router ({},{}) port {} label {} visited twice",
                    c.x, c.y, to_string(v.in), packet.label));
        }
        const PortSet outs = route_step(tables[v.router], v.in, packet);
        const Cycle t = packet.timestamp + v.hops * hop_latency;
        // Reverse so the stack pops ports in enum order.
        const auto ports = outs.ports();
        for (auto it = ports.rbegin(); it != ports.rend(); ++it)
        {
            const Port out = *it;
            if (out == Port::local)
            {
                trace.destinations.push_back({v.router, t, v.hops});
                continue;
            }
            const auto next = topo.neighbor(v.router, out);
            if (!next)
            {
                const MeshCoord c = topo.coord(v.router);
                throw RoutingFault(fmt::format(
                        "routing fault: router ({},{}) forwards label {} off "
                        "the mesh via {}",
                        c.x, c.y, packet.label, to_string(out)));
            }
            trace.links.push_back({v.router, v.in, out, t});
            stack.push_back({*next, opposite(out), v.hops + 1});
        }
    }

    std::sort(trace.destinations.begin(), trace.destinations.end(),
            [](const Delivery &a, const Delivery &b) { return a.core < b.core; });
    for (std::size_t i = 1; i < trace.destinations.size(); ++i)
    {
        if (trace.destinations[i].core == trace.destinations[i - 1].core)
        {
            throw RoutingFault(fmt::format(
                    "duplicate delivery of label {} to core {}", packet.label,
                    trace.destinations[i].core));
        }
    }
    trace.link_traversals = static_cast<std::uint32_t>(trace.links.size());
    return trace;
}

std::string dump_tables(const RoutingTables &tables)
{
    std::string out;
    for (const RoutingTable &table : tables)
    {
        for (const auto &[key, outs] : table.entries())
        {
            std::string ports;
            for (Port p : outs.ports())
            {
                if (!ports.empty())
                {
                    ports += ',';
                }
                ports += to_string(p);
            }
            out += fmt::format("{} {} {} {} -> {}\n", table.router().x,
                    table.router().y, to_string(key.first), key.second, ports);
        }
    }
    return out;
}

RoutingTables load_tables(const MeshTopology &topo, std::string_view text)
{
    RoutingTables tables = empty_tables(topo);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        std::istringstream fields(line);
        std::uint32_t x = 0;
        std::uint32_t y = 0;
        std::string in_port;
        LayerId label = 0;
        std::string arrow;
        std::string outs_text;
        if (!(fields >> x >> y >> in_port >> label >> arrow >> outs_text)
                || arrow != "->")
        {
            throw ConfigError(fmt::format(
                    "routing table line {}: malformed '{}'", line_no, line));
        }
        if (x >= topo.width() || y >= topo.height())
        {
            throw ConfigError(fmt::format(
                    "routing table line {}: router ({},{}) outside mesh",
                    line_no, x, y));
        }
        PortSet outs;
        std::size_t start = 0;
        while (start <= outs_text.size())
        {
            const auto comma = outs_text.find(',', start);
            const auto end = comma == std::string::npos ? outs_text.size()
                                                        : comma;
            outs.insert(parse_port(
                    std::string_view(outs_text).substr(start, end - start)));
            if (comma == std::string::npos)
            {
                break;
            }
            start = comma + 1;
        }
        tables[topo.id({x, y})].add(parse_port(in_port), label, outs);
    }
    return tables;
}

} // namespace nmsim

#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "nmsim/error.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/noc.hpp"

using namespace nmsim;

namespace {

std::uint32_t bfs_distance(const MeshTopology &topo, CoreId a, CoreId b)
{
    std::vector<int> dist(topo.router_count(), -1);
    std::deque<CoreId> open{a};
    dist[a] = 0;
    while (!open.empty())
    {
        const CoreId r = open.front();
        open.pop_front();
        for (Port p : kAllPorts)
        {
            if (auto n = topo.neighbor(r, p); n && dist[*n] < 0)
            {
                dist[*n] = dist[r] + 1;
                open.push_back(*n);
            }
        }
    }
    return static_cast<std::uint32_t>(dist[b]);
}

Mapping two_layer_mapping(std::uint32_t w, std::uint32_t h, std::vector<CoreId> first,
        std::vector<CoreId> second)
{
    Mapping m;
    m.mesh_width = w;
    m.mesh_height = h;
    std::uint32_t begin = 0;
    m.layers.emplace_back();
    for (CoreId c : first)
    {
        m.layers[0].push_back({c, begin, begin + 2});
        begin += 2;
    }
    begin = 0;
    m.layers.emplace_back();
    for (CoreId c : second)
    {
        m.layers[1].push_back({c, begin, begin + 2});
        begin += 2;
    }
    return m;
}

} // namespace

TEST(Mesh, LinksEnumerated)
{
    for (std::uint32_t w = 1; w <= 6; ++w)
    {
        for (std::uint32_t h = 1; h <= 6; ++h)
        {
            const MeshTopology topo(w, h);
            std::uint32_t links = 0;
            for (CoreId r = 0; r < topo.router_count(); ++r)
            {
                for (Port p : kAllPorts)
                {
                    if (p != Port::local && topo.neighbor(r, p))
                    {
                        ++links;
                        EXPECT_EQ(topo.neighbor(*topo.neighbor(r, p), opposite(p)), r);
                    }
                }
            }
            EXPECT_EQ(links, topo.link_count());
            EXPECT_EQ(links, 2 * ((w - 1) * h + (h - 1) * w));
        }
    }
}

TEST(Mesh, NorthIsPlusY)
{
    const MeshTopology topo(3, 3);
    EXPECT_EQ(topo.neighbor(topo.id({1, 1}), Port::north), topo.id({1, 2}));
    EXPECT_EQ(topo.neighbor(topo.id({1, 1}), Port::east), topo.id({2, 1}));
    EXPECT_FALSE(topo.neighbor(topo.id({0, 0}), Port::west).has_value());
    EXPECT_FALSE(topo.has_port(topo.id({2, 2}), Port::north));
}

TEST(Mesh, ManhattanEqualsBfs)
{
    const MeshTopology topo(6, 5);
    for (CoreId a = 0; a < topo.router_count(); ++a)
    {
        for (CoreId b = 0; b < topo.router_count(); ++b)
        {
            ASSERT_EQ(topo.manhattan(a, b), bfs_distance(topo, a, b));
        }
    }
}

TEST(RoutingTable, Entries)
{
    RoutingTable t({1, 1});
    t.add(Port::local, 3, {Port::east});
    t.add(Port::local, 3, {Port::north});
    EXPECT_EQ(t.route(Port::local, 3), (PortSet{Port::east, Port::north}));
    EXPECT_THROW(t.route(Port::west, 3), RoutingFault);
    EXPECT_THROW(t.add(Port::east, 1, {Port::east}), RoutingFault);
    EXPECT_THROW(t.add(Port::east, 1, {}), RoutingFault);
    EXPECT_NO_THROW(t.add(Port::local, 2, {Port::local}));
    try
    {
        t.route(Port::south, 9);
        FAIL();
    }
    catch (const RoutingFault &e)
    {
        const std::string what = e.what();
        EXPECT_NE(what.find("south"), std::string::npos) << what;
        EXPECT_NE(what.find("9"), std::string::npos) << what;
    }
}

TEST(Routing, UnicastFollowsXThenY)
{
    const MeshTopology topo(4, 4);
    const Mapping m = two_layer_mapping(4, 4, {topo.id({0, 0})}, {topo.id({3, 2})});
    const RoutingTables tables = generate_routing_tables(m, topo);
    const DeliveryTrace tr = deliver(topo, tables, SpikePacket{1, 0, std::nullopt, 0},
            topo.id({0, 0}), 2);
    ASSERT_EQ(tr.destination_cores(), std::vector<CoreId>{topo.id({3, 2})});
    EXPECT_EQ(tr.link_traversals, 5u);
    EXPECT_EQ(tr.destinations[0].hops, 5u);
    EXPECT_EQ(tr.destinations[0].arrival, 10u);
    // The first three hops go east, the last two north.
    for (std::size_t i = 0; i < 3; ++i)
    {
        EXPECT_EQ(tr.links[i].out_port, Port::east);
    }
    EXPECT_EQ(tr.links[3].out_port, Port::north);
    EXPECT_EQ(tr.links[4].out_port, Port::north);
}

TEST(Routing, MulticastSharesLinks)
{
    const MeshTopology topo(4, 1);
    const Mapping m = two_layer_mapping(4, 1, {0}, {1, 2, 3});
    const RoutingTables tables = generate_routing_tables(m, topo);
    const DeliveryTrace tr = deliver(topo, tables, SpikePacket{1, 0, std::nullopt, 0}, 0);
    EXPECT_EQ(tr.destination_cores(), (std::vector<CoreId>{1, 2, 3}));
    EXPECT_EQ(tr.link_traversals, 3u); // unicast would take 1 + 2 + 3
}

TEST(Routing, LocalDeliveryToSelf)
{
    const MeshTopology topo(2, 2);
    const Mapping m = two_layer_mapping(2, 2, {0}, {0, 3});
    const RoutingTables tables = generate_routing_tables(m, topo);
    const DeliveryTrace tr = deliver(topo, tables, SpikePacket{1, 0, std::nullopt, 0}, 0);
    EXPECT_EQ(tr.destination_cores(), (std::vector<CoreId>{0, 3}));
    EXPECT_EQ(tr.destinations[0].hops, 0u);
    EXPECT_EQ(tr.link_traversals, 2u);
}

TEST(Routing, SharedLabelTreesAgree)
{
    // Two source cores for one label with crossing paths; every table
    // entry must serve both.
    const MeshTopology topo(5, 5);
    for (CoreId a = 0; a < 25; a += 3)
    {
        for (CoreId b = 1; b < 25; b += 4)
        {
            if (a == b)
            {
                continue;
            }
            const Mapping m = two_layer_mapping(5, 5, {a, b}, {12, 4, 20});
            const RoutingTables tables = generate_routing_tables(m, topo);
            for (CoreId src : {a, b})
            {
                const DeliveryTrace tr =
                        deliver(topo, tables, SpikePacket{1, 0, std::nullopt, 0}, src);
                ASSERT_EQ(tr.destination_cores(), (std::vector<CoreId>{4, 12, 20}));
                for (const Delivery &d : tr.destinations)
                {
                    ASSERT_EQ(d.hops, topo.manhattan(src, d.core));
                }
            }
        }
    }
}

TEST(Routing, MissingEntryFaults)
{
    const MeshTopology topo(3, 3);
    EXPECT_THROW(deliver(topo, empty_tables(topo), SpikePacket{4, 0, std::nullopt, 0}, 0),
            RoutingFault);
}

TEST(Routing, LoopIsDetected)
{
    const MeshTopology topo(2, 2);
    RoutingTables tables = empty_tables(topo);
    EXPECT_THROW(tables[1].add(Port::west, 1, {Port::west}), RoutingFault);
    // A ring around the four routers that never delivers locally.
    tables[0].add(Port::local, 1, {Port::east});
    tables[1].add(Port::west, 1, {Port::north});
    tables[3].add(Port::south, 1, {Port::west});
    tables[2].add(Port::east, 1, {Port::south});
    tables[0].add(Port::north, 1, {Port::east});
    EXPECT_THROW(deliver(topo, tables, SpikePacket{1, 0, std::nullopt, 0}, 0), RoutingFault);
}

TEST(Routing, TableDumpRoundTrip)
{
    const MeshTopology topo(4, 3);
    const Mapping m = two_layer_mapping(4, 3, {0, 5}, {3, 7, 9, 11});
    const RoutingTables tables = generate_routing_tables(m, topo);
    const std::string text = dump_tables(tables);
    const RoutingTables back = load_tables(topo, text);
    EXPECT_EQ(back, tables);
    EXPECT_EQ(dump_tables(back), text);
    EXPECT_THROW(load_tables(topo, "9 9 local 1 -> east\n"), ConfigError);
    EXPECT_THROW(load_tables(topo, "0 0 up 1 -> east\n"), ConfigError);
}

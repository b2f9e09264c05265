#include "nmsim/mapping.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::string_view to_string(MappingPolicy policy)
{
    return policy == MappingPolicy::one_layer_per_core ? "one-layer-per-core"
                                                       : "balanced-split";
}

MappingPolicy parse_mapping_policy(std::string_view text)
{
    if (text == "one-layer-per-core" || text == "one_layer_per_core")
    {
        return MappingPolicy::one_layer_per_core;
    }
    if (text == "balanced-split" || text == "balanced_split")
    {
        return MappingPolicy::balanced_split;
    }
    throw ConfigError(fmt::format("unknown mapping policy '{}'", text));
}

std::vector<CoreId> Mapping::cores_of(std::size_t layer) const
{
    std::vector<CoreId> out;
    for (const Shard &s : layers.at(layer))
    {
        out.push_back(s.core);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<CoreId> Mapping::label_sources(LayerId label) const
{
    if (label == kInputLabel)
    {
        return {input_core};
    }
    return cores_of(label - 1);
}

std::vector<CoreId> Mapping::label_destinations(LayerId label) const
{
    if (label >= layers.size())
    {
        return {};
    }
    return cores_of(label);
}

Mapping assign_layers(const NetworkSpec &net, const MeshTopology &topo,
        MappingPolicy policy, std::uint64_t capacity_words)
{
    net.validate();
    Mapping m;
    m.policy = policy;
    m.mesh_width = topo.width();
    m.mesh_height = topo.height();
    m.capacity_words = capacity_words;
    const std::uint32_t cores = topo.router_count();
    const std::size_t n_layers = net.layers.size();

    if (policy == MappingPolicy::one_layer_per_core)
    {
        if (n_layers > cores)
        {
            throw ConfigError(fmt::format(
                    "one-layer-per-core: {} layers but only {} cores",
                    n_layers, cores));
        }
        for (std::size_t i = 0; i < n_layers; ++i)
        {
            m.layers.push_back({Shard{static_cast<CoreId>(i), 0,
                    net.layers[i].output_size()}});
        }
    }
    else
    {
        const std::uint32_t per_layer = n_layers == 0
                ? 1
                : std::max<std::uint32_t>(
                          1, cores / static_cast<std::uint32_t>(n_layers));
        for (std::size_t i = 0; i < n_layers; ++i)
        {
            const LayerSpec &layer = net.layers[i];
            const std::uint32_t n = layer.output_size();
            const CoreId first = n_layers > cores
                    ? static_cast<CoreId>(i % cores)
                    : static_cast<CoreId>(i * per_layer);
            std::uint32_t parts = layer.is_conv() || n_layers > cores
                    ? 1
                    : std::min(per_layer, n);
            std::vector<Shard> shards;
            std::uint32_t begin = 0;
            for (std::uint32_t p = 0; p < parts; ++p)
            {
                const std::uint32_t len = n / parts + (p < n % parts ? 1 : 0);
                shards.push_back(Shard{first + p, begin, begin + len});
                begin += len;
            }
            m.layers.push_back(std::move(shards));
        }
    }

    const FootprintReport report = check_capacity(m, net);
    if (const CoreFootprint *bad = report.first_overflow())
    {
        throw CapacityError(fmt::format(
                "core {} needs {} words ({} weights, {} states, {} routing) "
                "but has {}",
                bad->core, bad->total(), bad->weight_words, bad->state_words,
                bad->routing_words, capacity_words));
    }
    return m;
}

namespace {

Port xy_direction(MeshCoord from, MeshCoord to)
{
    if (to.x > from.x)
    {
        return Port::east;
    }
    if (to.x < from.x)
    {
        return Port::west;
    }
    if (to.y > from.y)
    {
        return Port::north;
    }
    if (to.y < from.y)
    {
        return Port::south;
    }
    return Port::local;
}

/// Whether an X-then-Y path entering `at` through `in` can still end at `to`.
bool xy_reachable(Port in, MeshCoord at, MeshCoord to)
{
    switch (in)
    {
    case Port::local:
        return true;
    case Port::west: // travelling east
        return to.x >= at.x;
    case Port::east:
        return to.x <= at.x;
    case Port::south: // travelling north
        return to.x == at.x && to.y >= at.y;
    case Port::north:
        return to.x == at.x && to.y <= at.y;
    }
    return false;
}

void grow_tree(const MeshTopology &topo, RoutingTables &tables, CoreId router,
        Port in, LayerId label, const std::vector<MeshCoord> &dests)
{
    const MeshCoord at = topo.coord(router);
    PortSet outs;
    for (MeshCoord d : dests)
    {
        if (xy_reachable(in, at, d))
        {
            outs.insert(xy_direction(at, d));
        }
    }
    if (outs.empty())
    {
        return;
    }
    if (auto existing = tables[router].find(in, label))
    {
        if (*existing == outs)
        {
            return; // subtree already installed from another source
        }
    }
    tables[router].add(in, label, outs);
    for (Port p : outs.ports())
    {
        if (p == Port::local)
        {
            continue;
        }
        const CoreId next = *topo.neighbor(router, p);
        grow_tree(topo, tables, next, opposite(p), label, dests);
    }
}

} // namespace

RoutingTables generate_routing_tables(const Mapping &mapping,
        const MeshTopology &topo)
{
    RoutingTables tables = empty_tables(topo);
    for (LayerId label = 0; label < mapping.layers.size(); ++label)
    {
        std::vector<MeshCoord> dests;
        for (CoreId c : mapping.label_destinations(label))
        {
            dests.push_back(topo.coord(c));
        }
        if (dests.empty())
        {
            continue;
        }
        for (CoreId src : mapping.label_sources(label))
        {
            grow_tree(topo, tables, src, Port::local, label, dests);
        }
    }
    return tables;
}

std::uint64_t dense_row_words(const LayerSpec &layer, std::uint32_t n_out)
{
    return weight_words(layer.weight_scheme, n_out);
}

ShardFootprint shard_footprint(const LayerSpec &layer, const Shard &shard)
{
    ShardFootprint f;
    if (layer.is_conv())
    {
        const ConvShape &c = layer.conv();
        f.weight_words = weight_words(layer.weight_scheme, layer.weight_count());
        if (layer.style == ExecutionStyle::depth_first)
        {
            f.state_words = std::uint64_t{c.k} * c.w * c.c_in + c.c_out;
        }
        else
        {
            f.state_words = std::uint64_t{c.out_h()} * c.out_w() * c.c_out;
        }
        return f;
    }
    f.weight_words = std::uint64_t{layer.dense().n_in}
            * dense_row_words(layer, shard.size());
    f.state_words = shard.size();
    return f;
}

bool FootprintReport::overflow() const
{
    return first_overflow() != nullptr;
}

const CoreFootprint *FootprintReport::first_overflow() const
{
    for (const CoreFootprint &c : cores)
    {
        if (c.total() > capacity_words)
        {
            return &c;
        }
    }
    return nullptr;
}

FootprintReport check_capacity(const Mapping &mapping, const NetworkSpec &net)
{
    const MeshTopology topo = mapping.topology();
    FootprintReport r;
    r.capacity_words = mapping.capacity_words;
    r.cores.resize(topo.router_count());
    for (CoreId c = 0; c < topo.router_count(); ++c)
    {
        r.cores[c].core = c;
    }
    for (std::size_t i = 0; i < mapping.layers.size(); ++i)
    {
        for (const Shard &s : mapping.layers[i])
        {
            const ShardFootprint f = shard_footprint(net.layers.at(i), s);
            r.cores.at(s.core).weight_words += f.weight_words;
            r.cores.at(s.core).state_words += f.state_words;
        }
    }
    const RoutingTables tables = generate_routing_tables(mapping, topo);
    for (CoreId c = 0; c < topo.router_count(); ++c)
    {
        r.cores[c].routing_words = tables[c].size();
    }
    return r;
}

std::string dump_mapping(const Mapping &mapping)
{
    std::string out;
    out += fmt::format("policy {}\n", to_string(mapping.policy));
    out += fmt::format("mesh {} {}\n", mapping.mesh_width, mapping.mesh_height);
    out += fmt::format("capacity {}\n", mapping.capacity_words);
    out += fmt::format("input {}\n", mapping.input_core);
    const MeshTopology topo = mapping.topology();
    for (std::size_t i = 0; i < mapping.layers.size(); ++i)
    {
        for (const Shard &s : mapping.layers[i])
        {
            const MeshCoord c = topo.coord(s.core);
            out += fmt::format("{} {} {} {} {}\n", i, c.x, c.y, s.begin, s.end);
        }
    }
    return out;
}

Mapping load_mapping(std::string_view text)
{
    Mapping m;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](std::string_view why) {
        throw ConfigError(fmt::format("mapping line {}: {}", line_no, why));
    };
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty())
        {
            continue;
        }
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "policy")
        {
            std::string p;
            ls >> p;
            m.policy = parse_mapping_policy(p);
        }
        else if (head == "mesh")
        {
            if (!(ls >> m.mesh_width >> m.mesh_height))
            {
                fail("bad mesh line");
            }
        }
        else if (head == "capacity")
        {
            if (!(ls >> m.capacity_words))
            {
                fail("bad capacity line");
            }
        }
        else if (head == "input")
        {
            if (!(ls >> m.input_core))
            {
                fail("bad input line");
            }
        }
        else
        {
            std::size_t layer = 0;
            std::uint32_t x = 0, y = 0;
            Shard s;
            std::istringstream fs(line);
            if (!(fs >> layer >> x >> y >> s.begin >> s.end))
            {
                fail("expected `layer x y begin end`");
            }
            if (x >= m.mesh_width || y >= m.mesh_height)
            {
                fail("core outside the mesh");
            }
            s.core = y * m.mesh_width + x;
            if (m.layers.size() <= layer)
            {
                m.layers.resize(layer + 1);
            }
            m.layers[layer].push_back(s);
        }
    }
    return m;
}

} // namespace nmsim

#include <gtest/gtest.h>

#include "nmsim/error.hpp"
#include "nmsim/mapping.hpp"

using namespace nmsim;

namespace {

NetworkSpec default_spec(QuantKind q = QuantKind::bf16)
{
    return dense_network_spec("d", 256, {256, 256, 256, 10}, SpikeMode::graded, q);
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

} // namespace

TEST(Mapping, OneLayerPerCore)
{
    const Mapping m = assign_layers(default_spec(), MeshTopology(2, 2),
            MappingPolicy::one_layer_per_core);
    ASSERT_EQ(m.layers.size(), 4u);
    for (CoreId i = 0; i < 4; ++i)
    {
        EXPECT_EQ(m.cores_of(i), std::vector<CoreId>{i});
    }
    EXPECT_EQ(m.label_sources(0), std::vector<CoreId>{m.input_core});
    EXPECT_EQ(m.label_sources(2), std::vector<CoreId>{1});
    EXPECT_EQ(m.label_destinations(2), std::vector<CoreId>{2});
    EXPECT_TRUE(m.label_destinations(4).empty());
    EXPECT_THROW(assign_layers(default_spec(), MeshTopology(3, 1),
                         MappingPolicy::one_layer_per_core),
            ConfigError);
}

TEST(Mapping, BalancedSplitEven)
{
    const Mapping m = assign_layers(default_spec(), MeshTopology(3, 3),
            MappingPolicy::balanced_split);
    // 9 cores / 4 layers: two cores per layer, split in halves.
    ASSERT_EQ(m.layers[0].size(), 2u);
    EXPECT_EQ(m.layers[0][0], (Shard{0, 0, 128}));
    EXPECT_EQ(m.layers[0][1], (Shard{1, 128, 256}));
    EXPECT_EQ(m.layers[3][1], (Shard{7, 5, 10}));
    EXPECT_EQ(m.label_sources(1), (std::vector<CoreId>{0, 1}));
    EXPECT_EQ(m.label_destinations(1), (std::vector<CoreId>{2, 3}));
}

TEST(Mapping, BalancedSplitWrapsWhenShortOfCores)
{
    const Mapping m = assign_layers(default_spec(QuantKind::int4), MeshTopology(2, 1),
            MappingPolicy::balanced_split);
    EXPECT_EQ(m.cores_of(0), std::vector<CoreId>{0});
    EXPECT_EQ(m.cores_of(1), std::vector<CoreId>{1});
    EXPECT_EQ(m.cores_of(2), std::vector<CoreId>{0});
}

TEST(Capacity, DenseClosedForm)
{
    for (QuantKind q : {QuantKind::bf16, QuantKind::int8, QuantKind::int4})
    {
        const NetworkSpec spec = default_spec(q);
        const Mapping m = assign_layers(spec, MeshTopology(3, 3), MappingPolicy::balanced_split);
        const FootprintReport r = check_capacity(m, spec);
        const unsigned bits = weight_bits(q);
        // Core 2 holds outputs [0, 128) of layer 1.
        EXPECT_EQ(r.cores[2].weight_words, 256 * ceil_div(128 * bits, 16));
        EXPECT_EQ(r.cores[2].state_words, 128u);
        // Core 7 holds 5 outputs of the last layer.
        EXPECT_EQ(r.cores[7].weight_words, 256 * ceil_div(5 * bits, 16));
        EXPECT_EQ(r.cores[8].total(), 0u);
        EXPECT_GT(r.cores[2].routing_words, 0u);
        EXPECT_FALSE(r.overflow());
    }
}

TEST(Capacity, ConvClosedForm)
{
    LayerSpec l;
    l.shape = ConvShape{32, 32, 2, 8, 3, 1};
    l.spike_mode = SpikeMode::binary;
    EXPECT_EQ(shard_footprint(l, {0, 0, l.output_size()}).state_words, 30u * 30u * 8u);
    EXPECT_EQ(shard_footprint(l, {0, 0, l.output_size()}).weight_words, 3u * 3u * 2u * 8u);
    l.style = ExecutionStyle::depth_first;
    EXPECT_EQ(shard_footprint(l, {0, 0, l.output_size()}).state_words, 3u * 32u * 2u + 8u);
    l.weight_scheme = QuantKind::int4;
    EXPECT_EQ(shard_footprint(l, {0, 0, l.output_size()}).weight_words, 36u);
}

TEST(Capacity, OverflowNamesCore)
{
    const NetworkSpec spec = default_spec();
    try
    {
        assign_layers(spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core, 60000);
        FAIL();
    }
    catch (const CapacityError &e)
    {
        const std::string what = e.what();
        EXPECT_NE(what.find("core 0"), std::string::npos) << what;
        EXPECT_NE(what.find("65"), std::string::npos) << what;
    }
    const Mapping m = assign_layers(spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
    Mapping tight = m;
    tight.capacity_words = 65536 + 256;
    const FootprintReport r = check_capacity(tight, spec);
    ASSERT_NE(r.first_overflow(), nullptr);
    EXPECT_EQ(r.first_overflow()->core, 0u); // routing entries tip it over
}

TEST(Mapping, TextRoundTrip)
{
    const Mapping m = assign_layers(default_spec(), MeshTopology(3, 3), MappingPolicy::balanced_split);
    const std::string text = dump_mapping(m);
    EXPECT_EQ(load_mapping(text), m);
    EXPECT_EQ(dump_mapping(load_mapping(text)), text);
    EXPECT_THROW(load_mapping("policy diagonal\n"), ConfigError);
}

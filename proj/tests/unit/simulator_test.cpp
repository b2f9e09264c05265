#include <gtest/gtest.h>

#include "nmsim/benchmark.hpp"
#include "nmsim/error.hpp"
#include "nmsim/oracle.hpp"
#include "nmsim/simulator.hpp"

using namespace nmsim;

namespace {

Network small_network(SpikeMode mode)
{
    return build_network(
            dense_network_spec("s", 24, {16, 12, 6}, mode, QuantKind::bf16, 0.0625f),
            WeightGenerator{3, 2.0, 0.0});
}

Stimulus every_third(std::uint32_t n, SpikeMode mode)
{
    Stimulus s;
    for (std::uint32_t i = 0; i < n; i += 3)
    {
        s.push_back({i, mode == SpikeMode::graded ? std::optional(Bf16::from_float(0.75f))
                                                  : std::nullopt});
    }
    return s;
}

} // namespace

TEST(Stimulus, VectorRoundTrip)
{
    const std::vector<Bf16> v{Bf16{}, Bf16::from_float(0.5f), Bf16{}, Bf16::from_float(2.0f)};
    const Stimulus g = stimulus_from_vector(v, SpikeMode::graded);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(stimulus_to_vector(g, 4), v);
    const Stimulus b = stimulus_from_vector(v, SpikeMode::binary);
    EXPECT_FALSE(b[0].value.has_value());
    EXPECT_EQ(stimulus_to_vector(b, 4)[3].to_float(), 1.0f);
}

TEST(Simulator, MatchesOracleOnEveryMesh)
{
    for (SpikeMode mode : {SpikeMode::graded, SpikeMode::binary})
    {
        const Network net = small_network(mode);
        const std::vector<Stimulus> steps{every_third(24, mode), Stimulus{},
                every_third(24, mode)};
        const auto ref = oracle::network_forward(net, stimulus_to_vector(steps[0], 24));
        for (auto [w, h] : {std::pair{3u, 1u}, std::pair{2u, 2u}, std::pair{4u, 3u}})
        {
            const Mapping m = assign_layers(net.spec, MeshTopology(w, h),
                    MappingPolicy::one_layer_per_core);
            const SimResult r = simulate(net, m, SimOptions{}, steps);
            ASSERT_EQ(r.steps.size(), 3u);
            for (std::size_t l = 0; l < ref.size(); ++l)
            {
                EXPECT_EQ(r.steps[0].outputs[l], ref[l].outputs);
                EXPECT_EQ(r.steps[0].states[l], ref[l].states);
                // Reset between steps: the same input gives the same answer.
                EXPECT_EQ(r.steps[2].outputs[l], ref[l].outputs);
                EXPECT_EQ(r.steps[1].spikes[l], 0u);
            }
        }
    }
}

TEST(Simulator, BookkeepingAddsUp)
{
    const Network net = small_network(SpikeMode::graded);
    const Mapping m =
            assign_layers(net.spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
    const std::vector<Stimulus> steps{every_third(24, SpikeMode::graded)};
    const SimResult r = simulate(net, m, SimOptions{}, steps);
    EXPECT_EQ(r.input_events, 8u);
    std::uint64_t spikes = 0;
    for (std::size_t l = 0; l + 1 < net.spec.layers.size(); ++l)
    {
        spikes += r.steps[0].spikes[l];
    }
    // Each packet of a non-final layer reaches exactly one core.
    EXPECT_EQ(r.packets_delivered, r.input_events + spikes);
    EXPECT_EQ(r.packets_emitted, spikes + r.steps[0].spikes.back());
    CostCounters sum;
    std::uint64_t ops = 0;
    for (const CoreReport &c : r.cores)
    {
        sum += c.counters;
        ops += c.synaptic_ops;
        EXPECT_LE(c.finish, r.makespan);
    }
    EXPECT_EQ(sum, r.totals);
    EXPECT_EQ(ops, r.synaptic_ops);
    EXPECT_EQ(r.totals[OpClass::noc_hop], r.link_traversals);
}

TEST(Simulator, TraceIsRecordedOnRequest)
{
    const Network net = small_network(SpikeMode::binary);
    const Mapping m =
            assign_layers(net.spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
    const std::vector<Stimulus> steps{every_third(24, SpikeMode::binary)};
    SimOptions opts;
    EXPECT_TRUE(simulate(net, m, opts, steps).trace.empty());
    opts.record_trace = true;
    const SimResult r = simulate(net, m, opts, steps);
    EXPECT_FALSE(r.trace.empty());
    EXPECT_NE(r.trace.front().find("inject"), std::string::npos);
}

TEST(Simulator, BalancedSplitStaysCloseToOracle)
{
    // Interleaved arrivals from several shards may reorder bf16 additions,
    // so only the spike pattern of a binary network with margin is compared.
    const Network net = build_network(
            dense_network_spec("b", 32, {32, 8}, SpikeMode::graded, QuantKind::bf16),
            WeightGenerator{5, 2.0, 0.0});
    const Mapping m = assign_layers(net.spec, MeshTopology(2, 2), MappingPolicy::balanced_split);
    const std::vector<Stimulus> steps{every_third(32, SpikeMode::graded)};
    const SimResult r = simulate(net, m, SimOptions{}, steps);
    const auto ref = oracle::network_forward(net, stimulus_to_vector(steps[0], 32));
    EXPECT_EQ(r.steps[0].outputs[0], ref[0].outputs); // single input source
    for (std::size_t j = 0; j < ref[1].states.size(); ++j)
    {
        EXPECT_NEAR(r.steps[0].states[1][j].to_float(), ref[1].states[j].to_float(),
                0.02 * (1.0 + std::fabs(ref[1].states[j].to_float())));
    }
}

TEST(Simulator, RejectsOutOfRangeInput)
{
    const Network net = small_network(SpikeMode::graded);
    const Mapping m =
            assign_layers(net.spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
    const std::vector<Stimulus> steps{{{24, Bf16::from_float(1.0f)}}};
    EXPECT_THROW(simulate(net, m, SimOptions{}, steps), Error);
}

#include <benchmark/benchmark.h>

#include "nmsim/benchmark.hpp"
#include "nmsim/engines.hpp"
#include "nmsim/line_buffer.hpp"

using namespace nmsim;

static void BM_NeuronUpdate(benchmark::State &state)
{
    Bf16 s;
    const Bf16 w = Bf16::from_float(0.001f);
    const std::optional<Bf16> v = Bf16::from_float(0.75f);
    for (auto _ : state)
    {
        s = neuron_update(s, w, v);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_NeuronUpdate);

static void BM_DenseGroup(benchmark::State &state)
{
    const auto group = static_cast<std::uint32_t>(state.range(0));
    LayerSpec l;
    l.shape = DenseShape{256, 256};
    const Network net = build_network(
            NetworkSpec{"b", 256, SpikeMode::graded, {l}}, WeightGenerator{});
    CoreState core(0, CoreVariant::make(VariantTag::v3), kDefaultCapacityWords);
    const ShardView v = install_shard(core, net.spec.layers[0], net.weights[0], {0, 0, 256});
    std::vector<SpikePacket> pkts;
    for (std::uint32_t i = 0; i < group; ++i)
    {
        pkts.push_back({0, i * 7, Bf16::from_float(0.5f), 0});
    }
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(process_dense_group(core, v, pkts));
        threshold_shard(core, v);
    }
    state.SetItemsProcessed(state.iterations() * group * 256);
}
BENCHMARK(BM_DenseGroup)->Arg(1)->Arg(4)->Arg(16);

static void BM_DefaultBenchmark(benchmark::State &state)
{
    BenchmarkConfig cfg = default_benchmark_config();
    cfg.variant = static_cast<VariantTag>(state.range(0));
    const Network net = cfg.effective_network();
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(run_simulation(cfg, net).makespan);
    }
}
BENCHMARK(BM_DefaultBenchmark)
        ->Arg(static_cast<int>(VariantTag::v1))
        ->Arg(static_cast<int>(VariantTag::v3))
        ->Unit(benchmark::kMillisecond);

static void BM_DepthFirstFrame(benchmark::State &state)
{
    LayerSpec l;
    l.shape = ConvShape{32, 32, 2, 8, 3, 1};
    l.spike_mode = SpikeMode::binary;
    l.threshold = 0.4375f;
    l.style = ExecutionStyle::depth_first;
    const Network net = build_network(
            NetworkSpec{"c", 32 * 32 * 2, SpikeMode::binary, {l}}, WeightGenerator{});
    Rng rng(3);
    std::vector<PixelEvent> events;
    for (std::uint32_t i = 0; i < 32 * 32 * 2; ++i)
    {
        if (rng.uniform() < 0.1)
        {
            events.push_back(pixel_from_index(i, 32, 2, std::nullopt));
        }
    }
    for (auto _ : state)
    {
        LineBuffer lb(net.spec.layers[0], net.weights[0].values,
                CoreVariant::make(VariantTag::v3), ControlConstants{});
        std::size_t out = 0;
        for (const PixelEvent &e : events)
        {
            out += lb.push(e).size();
        }
        out += lb.finish().size();
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_DepthFirstFrame)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nmsim/attention.hpp"
#include "nmsim/benchmark.hpp"
#include "nmsim/config.hpp"
#include "nmsim/error.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/noc.hpp"
#include "nmsim/oracle.hpp"
#include "nmsim/report.hpp"
#include "nmsim/simulator.hpp"

using namespace nmsim;

namespace {

const std::string kConfigDir = NMSIM_CONFIG_SOURCE_DIR;

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string &what)
    {
        if (!ok)
        {
            pass = false;
            if (!detail.empty())
            {
                detail += "; ";
            }
            detail += what;
        }
    }
    void note(const std::string &what)
    {
        if (!detail.empty())
        {
            detail += "; ";
        }
        detail += what;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_bits(const std::vector<Bf16> &a, const std::vector<Bf16> &b)
{
    if (a.size() != b.size())
    {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (a[i].bits() != b[i].bits())
        {
            return false;
        }
    }
    return true;
}

Stimulus random_stimulus(Rng &rng, std::uint32_t n, std::uint32_t count, SpikeMode mode)
{
    std::set<std::uint32_t> picked;
    while (picked.size() < std::min(count, n))
    {
        picked.insert(static_cast<std::uint32_t>(rng.below(n)));
    }
    Stimulus s;
    for (std::uint32_t i : picked)
    {
        InputEvent ev{i, std::nullopt};
        if (mode == SpikeMode::graded)
        {
            ev.value = Bf16::from_float(static_cast<float>(rng.uniform(0.25, 1.0)));
        }
        s.push_back(ev);
    }
    return s;
}

/// Simulated per-layer outputs (and states of stateful layers) against the
/// oracle forward pass, every step.
bool matches_oracle(const Network &net, const SimResult &sim,
        const std::vector<Stimulus> &stimuli, std::string &why)
{
    for (std::size_t s = 0; s < stimuli.size(); ++s)
    {
        const auto ref = oracle::network_forward(
                net, stimulus_to_vector(stimuli[s], net.spec.input_dim));
        const StepRecord &got = sim.steps.at(s);
        for (std::size_t l = 0; l < ref.size(); ++l)
        {
            if (!same_bits(ref[l].outputs, got.outputs.at(l)))
            {
                why = fmt::format("step {} layer {} outputs differ", s, l);
                return false;
            }
            const bool stateful = !(net.spec.layers[l].is_conv()
                    && net.spec.layers[l].style == ExecutionStyle::depth_first);
            if (stateful && !same_bits(ref[l].states, got.states.at(l)))
            {
                why = fmt::format("step {} layer {} states differ", s, l);
                return false;
            }
        }
    }
    return true;
}

BenchmarkConfig default_config()
{
    return load_benchmark_config(kConfigDir + "/benchmark.yaml");
}

/// Calibrated once, shared by the criteria that need it.
const CalibrationResult &calibrated()
{
    static const CalibrationResult r = calibrate_benchmark(default_config());
    return r;
}

SimReport run_with(BenchmarkConfig cfg, VariantTag v, std::uint32_t g, SpikeMode m,
        QuantKind q)
{
    cfg.variant = v;
    cfg.group = g;
    cfg.spike_mode = m;
    cfg.weight_scheme = q;
    return run_benchmark(cfg);
}

// 1. Dense functional equivalence on random networks.
Outcome functional_equivalence()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0;
    int active = 0; // networks whose last layer emitted something
    for (int i = 0; i < 100; ++i)
    {
        Rng rng(0xACE0 + i);
        const SpikeMode mode = i % 2 == 0 ? SpikeMode::graded : SpikeMode::binary;
        const QuantKind scheme = std::array{QuantKind::bf16, QuantKind::int8,
                QuantKind::int4}[(i / 2) % 3];
        const std::uint32_t layers = 2 + static_cast<std::uint32_t>(rng.below(3));
        const std::uint32_t input = 16 + static_cast<std::uint32_t>(rng.below(241));
        std::vector<std::uint32_t> sizes;
        for (std::uint32_t l = 0; l < layers; ++l)
        {
            sizes.push_back(16 + static_cast<std::uint32_t>(rng.below(241)));
        }
        const float threshold = static_cast<float>(rng.uniform(0.03, 0.3));
        const Network net = build_network(
                dense_network_spec(fmt::format("rand{}", i), input, sizes, mode, scheme,
                        threshold),
                WeightGenerator{static_cast<std::uint64_t>(100 + i), 2.0, 0.0});
        const Mapping mapping = assign_layers(
                net.spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
        std::vector<Stimulus> stimuli;
        for (int s = 0; s < 2; ++s)
        {
            const auto count = 1 + static_cast<std::uint32_t>(rng.below(input / 2));
            stimuli.push_back(random_stimulus(rng, input, count, mode));
        }
        SimOptions opts;
        opts.group = 1 + static_cast<std::uint32_t>(rng.below(4));
        const SimResult sim = simulate(net, mapping, opts, stimuli);
        std::string why;
        active += sim.steps[0].spikes.back() + sim.steps[1].spikes.back() > 0 ? 1 : 0;
        if (!matches_oracle(net, sim, stimuli, why))
        {
            if (++mismatches <= 3)
            {
                o.require(false, fmt::format("network {}: {}", i, why));
            }
        }
    }
    const double secs = seconds_since(t0);
    o.require(mismatches == 0, fmt::format("{} of 100 networks differ", mismatches));
    o.require(secs < 120.0, fmt::format("runtime {:.1f} s over 120 s", secs));
    o.require(active >= 80, fmt::format("only {} networks reach the last layer", active));
    o.note(fmt::format("100 networks bit-identical ({} with output spikes), {:.2f} s", active,
            secs));
    return o;
}

// 2. Spike grouping: same states, 4x fewer state accesses, calibrated gain.
Outcome spike_grouping()
{
    Outcome o;
    const BenchmarkConfig cfg = default_config();
    const Network net = cfg.effective_network();
    const Mapping mapping =
            assign_layers(net.spec, MeshTopology(2, 2), MappingPolicy::one_layer_per_core);
    const std::uint32_t n = net.spec.layers[0].output_size();
    const std::uint64_t row_words = weight_words(net.spec.layers[0].weight_scheme, n);
    int bad_states = 0;
    int bad_counts = 0;
    for (int i = 0; i < 50; ++i)
    {
        Rng rng(0xBEE0 + i);
        const auto events = 4 * (1 + static_cast<std::uint32_t>(rng.below(16)));
        const std::vector<Stimulus> stimuli{
                random_stimulus(rng, net.spec.input_dim, events, SpikeMode::graded)};
        SimOptions g1;
        g1.group = 1;
        SimOptions g4;
        g4.group = 4;
        const SimResult a = simulate(net, mapping, g1, stimuli);
        const SimResult b = simulate(net, mapping, g4, stimuli);
        for (std::size_t l = 0; l < net.spec.layers.size(); ++l)
        {
            if (!same_bits(a.steps[0].states[l], b.steps[0].states[l])
                    || !same_bits(a.steps[0].outputs[l], b.steps[0].outputs[l]))
            {
                ++bad_states;
                break;
            }
        }
        // Core 0 hosts layer 0 alone. Its dmem traffic is weights (one row
        // per event), neuron states (per group) and one threshold scan.
        auto state_traffic = [&](const SimResult &r) {
            const CostCounters &c = r.cores[0].counters;
            const std::uint64_t reads =
                    c[OpClass::dmem_read_word] - events * row_words - n;
            const std::uint64_t writes = c[OpClass::dmem_write_word] - n;
            return std::pair{reads, writes};
        };
        const auto [r1, w1] = state_traffic(a);
        const auto [r4, w4] = state_traffic(b);
        const std::uint64_t expect1 = std::uint64_t{events} * n;
        if (r1 != expect1 || w1 != expect1 || r4 * 4 != r1 || w4 * 4 != w1)
        {
            ++bad_counts;
        }
    }
    o.require(bad_states == 0, fmt::format("{} of 50 event sets changed states", bad_states));
    o.require(bad_counts == 0,
            fmt::format("{} of 50 event sets without an exact 4x state-traffic cut",
                    bad_counts));

    BenchmarkConfig cal = cfg;
    cal.cost_table = calibrated().table;
    const SimReport u = run_with(cal, VariantTag::v3, 1, SpikeMode::graded, QuantKind::bf16);
    const SimReport g = run_with(cal, VariantTag::v3, 4, SpikeMode::graded, QuantKind::bf16);
    const double eg = u.energy_uj / g.energy_uj;
    const double tg = u.latency_us / g.latency_us;
    o.require(eg >= 1.6 && eg <= 2.5, fmt::format("energy gain {:.3f} outside [1.6, 2.5]", eg));
    o.require(tg >= 1.6 && tg <= 2.5, fmt::format("time gain {:.3f} outside [1.6, 2.5]", tg));
    o.note(fmt::format("states identical on 50 sets, state r/w cut 4x, gain E {:.3f}x T {:.3f}x",
            eg, tg));
    return o;
}

// 3. Depth-first CNN against the oracle conv chain, memory against stateful.
Outcome depth_first_conv()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    BenchmarkConfig cfg = load_benchmark_config(kConfigDir + "/cnn_depth_first.yaml");
    const NetworkSpec spec = cfg.effective_spec();
    o.require(spec.layers.size() == 3, "expected 3 conv layers");
    std::uint64_t stateful_words = 0;
    for (const LayerSpec &l : spec.layers)
    {
        const ConvShape &c = l.conv();
        o.require(l.style == ExecutionStyle::depth_first && c.k == 3, "layer not 3x3 depth-first");
        stateful_words += std::uint64_t{c.out_h()} * c.out_w() * c.c_out;
    }
    const ConvShape &first = spec.layers[0].conv();
    o.require(first.h == 32 && first.w == 32, "input is not 32x32");
    o.require(spec.layers[0].conv().c_out == 8 && spec.layers[1].conv().c_out == 16
                    && spec.layers[2].conv().c_out == 16,
            "channels are not 8/16/16");

    const Network net = cfg.effective_network();
    const std::vector<Stimulus> stimuli = make_stimuli(cfg, net.spec);
    const SimResult sim = run_simulation(cfg, net);
    std::string why;
    o.require(matches_oracle(net, sim, stimuli, why), why);

    std::uint64_t peak = 0;
    for (const CoreReport &c : sim.cores)
    {
        peak += c.peak_words - c.static_words;
    }
    const double ratio = peak == 0 ? 0.0 : static_cast<double>(stateful_words) / peak;
    o.require(peak > 0 && ratio >= 50.0,
            fmt::format("activation memory ratio {:.1f}x below 50x", ratio));
    std::uint64_t spikes = 0;
    for (std::uint64_t s : sim.steps[0].spikes)
    {
        spikes += s;
    }
    o.require(spikes > 0, "no layer produced spikes");
    const double secs = seconds_since(t0);
    o.require(secs < 60.0, fmt::format("runtime {:.1f} s over 60 s", secs));
    o.note(fmt::format("bit-identical, peak {} words vs stateful {} ({:.1f}x), {:.2f} s", peak,
            stateful_words, ratio, secs));
    return o;
}

// 4. Variant totals and ratios after calibration.
Outcome variant_ratios()
{
    Outcome o;
    const CalibrationResult &cal = calibrated();
    BenchmarkConfig cfg = default_config();
    cfg.cost_table = cal.table;
    const std::array<double, 3> te{34.0, 7.0, 3.0};
    const std::array<double, 3> tt{7000.0, 1100.0, 550.0};
    std::array<SimReport, 3> r;
    const std::array<VariantTag, 3> tags{VariantTag::v1, VariantTag::v2, VariantTag::v3};
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
    {
        r[i] = run_with(cfg, tags[i], 1, SpikeMode::graded, QuantKind::bf16);
        const double de = r[i].energy_per_inference_uj / te[i] - 1.0;
        const double dt = r[i].latency_per_inference_us / tt[i] - 1.0;
        worst = std::max({worst, std::fabs(de), std::fabs(dt)});
        o.require(std::fabs(de) <= 0.25, fmt::format("{} energy {:.3f} uJ off by {:+.1f}%",
                                                 to_string(tags[i]), r[i].energy_uj, 100 * de));
        o.require(std::fabs(dt) <= 0.25, fmt::format("{} time {:.1f} us off by {:+.1f}%",
                                                 to_string(tags[i]), r[i].latency_us, 100 * dt));
    }
    const double e12 = r[0].energy_uj / r[1].energy_uj;
    const double e23 = r[1].energy_uj / r[2].energy_uj;
    const double t12 = r[0].latency_us / r[1].latency_us;
    const double t23 = r[1].latency_us / r[2].latency_us;
    const double share = r[2].scalar_energy_share();
    o.require(e12 >= 3.6 && e12 <= 6.1, fmt::format("E(V1)/E(V2) {:.3f} outside [3.6, 6.1]", e12));
    o.require(e23 >= 1.75 && e23 <= 2.9, fmt::format("E(V2)/E(V3) {:.3f} outside [1.75, 2.9]", e23));
    o.require(t12 >= 4.8 && t12 <= 8.0, fmt::format("T(V1)/T(V2) {:.3f} outside [4.8, 8.0]", t12));
    o.require(t23 >= 1.5 && t23 <= 2.5, fmt::format("T(V2)/T(V3) {:.3f} outside [1.5, 2.5]", t23));
    const double share_ref = 0.2 / 3.0;
    o.require(share >= 0.5 * share_ref && share <= 1.5 * share_ref,
            fmt::format("V3 scalar share {:.4f} outside [{:.4f}, {:.4f}]", share,
                    0.5 * share_ref, 1.5 * share_ref));
    o.note(fmt::format("worst total residual {:.1f}%, E {:.2f}/{:.2f}, T {:.2f}/{:.2f}, "
                       "scalar share {:.3f}",
            100 * worst, e12, e23, t12, t23, share));
    return o;
}

// 5. int4 and binary-spike savings on the calibrated benchmark (V3, G = 4).
Outcome sweeps()
{
    Outcome o;
    BenchmarkConfig cfg = default_config();
    cfg.cost_table = calibrated().table;
    const SimReport base = run_with(cfg, VariantTag::v3, 4, SpikeMode::graded, QuantKind::bf16);
    const SimReport int4 = run_with(cfg, VariantTag::v3, 4, SpikeMode::graded, QuantKind::int4);
    const SimReport bin = run_with(cfg, VariantTag::v3, 4, SpikeMode::binary, QuantKind::bf16);
    const double q = 1.0 - int4.energy_uj / base.energy_uj;
    const double b = 1.0 - bin.energy_uj / base.energy_uj;
    o.require(q >= 0.25 && q <= 0.55, fmt::format("int4 reduction {:.3f} outside [0.25, 0.55]", q));
    o.require(b >= 0.05 && b <= 0.15, fmt::format("binary reduction {:.3f} outside [0.05, 0.15]", b));
    const SimReport base1 = run_with(cfg, VariantTag::v3, 1, SpikeMode::graded, QuantKind::bf16);
    const SimReport int41 = run_with(cfg, VariantTag::v3, 1, SpikeMode::graded, QuantKind::int4);
    const SimReport bin1 = run_with(cfg, VariantTag::v3, 1, SpikeMode::binary, QuantKind::bf16);
    o.note(fmt::format("G=4: int4 -{:.1f}%, binary -{:.1f}% (G=1 for reference: -{:.1f}%, -{:.1f}%)",
            100 * q, 100 * b, 100 * (1.0 - int41.energy_uj / base1.energy_uj),
            100 * (1.0 - bin1.energy_uj / base1.energy_uj)));
    return o;
}

// 6. A stimulus without events costs nothing.
Outcome idle()
{
    Outcome o;
    BenchmarkConfig cfg = default_config();
    cfg.stimulus.kind = StimulusConfig::Kind::none;
    for (VariantTag v : {VariantTag::v1, VariantTag::v2, VariantTag::v3})
    {
        for (std::uint32_t g : {1u, 4u})
        {
            const SimReport r = run_with(cfg, v, g, SpikeMode::graded, QuantKind::bf16);
            o.require(r.energy_uj == 0.0 && r.totals.all_zero() && r.makespan_cycles == 0,
                    fmt::format("{} G={} spends {} uJ", to_string(v), g, r.energy_uj));
        }
    }
    BenchmarkConfig cnn = load_benchmark_config(kConfigDir + "/cnn_depth_first.yaml");
    cnn.stimulus.kind = StimulusConfig::Kind::none;
    const SimReport r = run_benchmark(cnn);
    o.require(r.energy_uj == 0.0 && r.totals.all_zero(), "depth-first CNN spends energy when idle");
    o.note("zero energy on V1/V2/V3, G=1/4, dense and depth-first");
    return o;
}

// 7. Routing on random mappings.
Outcome noc_properties()
{
    Outcome o;
    int failures = 0;
    std::uint64_t packets = 0;
    std::uint64_t multicast = 0;
    for (int i = 0; i < 200; ++i)
    {
        Rng rng(0xC0DE + i);
        Mapping m;
        m.mesh_width = 1 + static_cast<std::uint32_t>(rng.below(6));
        m.mesh_height = 1 + static_cast<std::uint32_t>(rng.below(6));
        const std::uint32_t cores = m.mesh_width * m.mesh_height;
        m.input_core = static_cast<CoreId>(rng.below(cores));
        const auto layers = 1 + rng.below(5);
        for (std::uint64_t l = 0; l < layers; ++l)
        {
            std::set<CoreId> chosen;
            const auto want = 1 + rng.below(std::min<std::uint64_t>(cores, 4));
            while (chosen.size() < want)
            {
                chosen.insert(static_cast<CoreId>(rng.below(cores)));
            }
            std::vector<Shard> shards;
            std::uint32_t begin = 0;
            for (CoreId c : chosen)
            {
                shards.push_back(Shard{c, begin, begin + 4});
                begin += 4;
            }
            m.layers.push_back(shards);
        }
        const MeshTopology topo = m.topology();
        const RoutingTables tables = generate_routing_tables(m, topo);
        for (LayerId label = 0; label < layers; ++label)
        {
            const std::vector<CoreId> dests = m.label_destinations(label);
            for (CoreId src : m.label_sources(label))
            {
                SpikePacket pkt;
                pkt.label = label;
                ++packets;
                DeliveryTrace tr;
                try
                {
                    tr = deliver(topo, tables, pkt, src);
                }
                catch (const RoutingFault &e)
                {
                    ++failures;
                    continue;
                }
                std::uint64_t unicast = 0;
                bool ok = tr.destination_cores() == dests;
                for (const Delivery &d : tr.destinations)
                {
                    const MeshCoord a = topo.coord(src);
                    const MeshCoord b = topo.coord(d.core);
                    const std::uint32_t manhattan =
                            (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
                    ok = ok && d.hops == manhattan;
                    unicast += manhattan;
                }
                ok = ok && tr.link_traversals <= unicast;
                multicast += dests.size() > 1 ? 1 : 0;
                if (dests.size() == 1)
                {
                    ok = ok && tr.link_traversals == unicast;
                }
                failures += ok ? 0 : 1;
            }
        }
    }
    o.require(failures == 0, fmt::format("{} of {} packets misrouted", failures, packets));
    o.note(fmt::format("{} packets on 200 mappings ({} multicast) delivered exactly", packets,
            multicast));
    return o;
}

// 8. Hard attention beats the full-frame pipeline.
Outcome hard_attention()
{
    Outcome o;
    AttentionConfig cfg = default_attention_config();
    cfg.table = calibrated().table;
    const EventFrame frame = make_toy_frame(1, 64, 64, 16, 5, 0.3, 0.05);
    const AttentionResult r = run_hard_attention(cfg, frame);
    o.require(r.roi_cell == 5, fmt::format("RoI cell {} instead of 5", r.roi_cell));
    o.require(r.attention.energy_uj < r.baseline.energy_uj,
            fmt::format("energy {:.4f} uJ not below baseline {:.4f} uJ", r.attention.energy_uj,
                    r.baseline.energy_uj));
    o.require(r.attention.latency_us < r.baseline.latency_us,
            fmt::format("latency {:.2f} us not below baseline {:.2f} us", r.attention.latency_us,
                    r.baseline.latency_us));
    o.note(fmt::format("E {:.4f} vs {:.4f} uJ ({:.2f}x), T {:.1f} vs {:.1f} us ({:.2f}x)",
            r.attention.energy_uj, r.baseline.energy_uj,
            r.baseline.energy_uj / r.attention.energy_uj, r.attention.latency_us,
            r.baseline.latency_us, r.baseline.latency_us / r.attention.latency_us));
    return o;
}

// 9. Fixed seed, identical bytes.
Outcome determinism()
{
    Outcome o;
    std::vector<BenchmarkConfig> cfgs;
    cfgs.push_back(default_config());
    BenchmarkConfig v1 = default_config();
    v1.variant = VariantTag::v1;
    cfgs.push_back(v1);
    BenchmarkConfig mixed = default_config();
    mixed.group = 4;
    mixed.spike_mode = SpikeMode::binary;
    mixed.weight_scheme = QuantKind::int4;
    mixed.mapping = MappingPolicy::balanced_split;
    mixed.repetitions = 3;
    cfgs.push_back(mixed);
    cfgs.push_back(load_benchmark_config(kConfigDir + "/cnn_depth_first.yaml"));
    for (const BenchmarkConfig &cfg : cfgs)
    {
        const std::string a = report_to_json(run_benchmark(cfg));
        const std::string b = report_to_json(run_benchmark(cfg));
        o.require(a == b, fmt::format("'{}' reports differ", cfg.name));
    }
    o.note(fmt::format("{} configurations byte-identical", cfgs.size()));
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
            {"functional equivalence (dense)", functional_equivalence},
            {"spike grouping", spike_grouping},
            {"depth-first conv", depth_first_conv},
            {"variant ratios after calibration", variant_ratios},
            {"int4 and binary sweeps", sweeps},
            {"idle costs nothing", idle},
            {"NoC delivery", noc_properties},
            {"hard attention", hard_attention},
            {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o.pass = false;
            o.detail = fmt::format("threw: {}", e.what());
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

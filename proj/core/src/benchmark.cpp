#include "nmsim/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nmsim/error.hpp"
#include "nmsim/tensor_io.hpp"

namespace nmsim {

std::vector<Stimulus> make_stimuli(const BenchmarkConfig &cfg,
        const NetworkSpec &spec)
{
    std::vector<Stimulus> steps;
    const std::uint32_t n = spec.input_dim;
    switch (cfg.stimulus.kind)
    {
    case StimulusConfig::Kind::none:
        steps.assign(cfg.repetitions, Stimulus{});
        break;
    case StimulusConfig::Kind::generated:
    {
        const auto active = std::max<std::uint32_t>(1,
                static_cast<std::uint32_t>(std::lround(cfg.stimulus.density * n)));
        for (std::uint32_t r = 0; r < cfg.repetitions; ++r)
        {
            Rng rng(cfg.stimulus.seed + r);
            std::vector<std::uint32_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0u);
            for (std::uint32_t i = 0; i < active; ++i)
            {
                std::swap(idx[i], idx[i + rng.below(n - i)]);
            }
            idx.resize(std::min(active, n));
            std::sort(idx.begin(), idx.end());
            Stimulus s;
            for (std::uint32_t i : idx)
            {
                InputEvent ev{i, std::nullopt};
                if (spec.input_mode == SpikeMode::graded)
                {
                    ev.value = Bf16::from_float(static_cast<float>(rng.uniform(0.5, 1.0)));
                }
                s.push_back(ev);
            }
            steps.push_back(std::move(s));
        }
        break;
    }
    case StimulusConfig::Kind::file:
    {
        const Tensor t = load_tensor(cfg.stimulus.path);
        const std::uint64_t rows = t.element_count() / std::max<std::uint32_t>(n, 1);
        if (t.dims.back() != n || rows * n != t.element_count())
        {
            throw ConfigError(fmt::format(
                    "stimulus file '{}': last dim must equal the input size {}",
                    cfg.stimulus.path, n));
        }
        for (std::uint64_t r = 0; r < rows; ++r)
        {
            std::vector<Bf16> row(n);
            for (std::uint32_t i = 0; i < n; ++i)
            {
                const float v = t.values[r * n + i];
                if (!std::isfinite(v))
                {
                    throw NumericFault("stimulus file holds a non-finite value");
                }
                row[i] = Bf16::from_float(v);
            }
            steps.push_back(stimulus_from_vector(row, spec.input_mode));
        }
        break;
    }
    }
    return steps;
}

double SimReport::scalar_energy_share() const
{
    if (energy_uj <= 0.0)
    {
        return 0.0;
    }
    return (energy_by_class_uj[static_cast<std::size_t>(OpClass::riscv_instr)]
                   + energy_by_class_uj[static_cast<std::size_t>(OpClass::imem_fetch)])
            / energy_uj;
}

SimReport make_report(const BenchmarkConfig &cfg, const NetworkSpec &spec,
        const SimResult &result)
{
    SimReport r;
    r.name = cfg.name;
    r.variant = cfg.variant;
    r.group = cfg.group;
    r.spike_mode = spec.input_mode;
    for (const LayerSpec &l : spec.layers)
    {
        r.weight_schemes.push_back(l.weight_scheme);
    }
    r.mapping = cfg.mapping;
    r.mesh_width = cfg.mesh_width;
    r.mesh_height = cfg.mesh_height;
    r.stimulus_seed = cfg.stimulus.seed;
    r.repetitions = cfg.repetitions;
    r.table = cfg.cost_table;

    const CostBreakdown b = evaluate(result.totals, cfg.cost_table);
    r.energy_uj = b.energy_uj;
    r.energy_by_class_uj = b.energy_uj_by_class;
    r.totals = result.totals;
    r.makespan_cycles = result.makespan;
    r.latency_us = cycles_to_us(result.makespan, cfg.cost_table);
    r.energy_per_inference_uj = r.energy_uj / cfg.repetitions;
    r.latency_per_inference_us = r.latency_us / cfg.repetitions;
    r.cores = result.cores;
    r.input_events = result.input_events;
    r.packets_emitted = result.packets_emitted;
    r.packets_delivered = result.packets_delivered;
    r.noc_hops = result.link_traversals;
    r.synaptic_ops = result.synaptic_ops;
    r.ops_per_packet = result.packets_delivered == 0
            ? 0.0
            : static_cast<double>(result.synaptic_ops) / result.packets_delivered;
    r.layer_spikes.assign(spec.layers.size(), 0);
    for (const StepRecord &s : result.steps)
    {
        for (std::size_t i = 0; i < s.spikes.size(); ++i)
        {
            r.layer_spikes[i] += s.spikes[i];
        }
    }
    return r;
}

std::string check_report(const SimReport &r)
{
    double by_class = 0.0;
    for (double e : r.energy_by_class_uj)
    {
        by_class += e;
    }
    if (by_class != r.energy_uj)
    {
        return fmt::format("energy {} != class sum {}", r.energy_uj, by_class);
    }
    CostCounters sum;
    double core_energy = 0.0;
    std::uint64_t ops = 0;
    std::uint64_t received = 0;
    Cycle finish = 0;
    for (const CoreReport &c : r.cores)
    {
        sum += c.counters;
        core_energy += c.energy_uj;
        ops += c.synaptic_ops;
        received += c.packets_received;
        finish = std::max(finish, c.finish);
    }
    if (!(sum == r.totals))
    {
        return "op-class totals differ from the per-core sum";
    }
    if (std::fabs(core_energy - r.energy_uj) > 1e-9 * std::max(1.0, r.energy_uj))
    {
        return fmt::format("energy {} != core sum {}", r.energy_uj, core_energy);
    }
    if (ops != r.synaptic_ops)
    {
        return "synaptic ops differ from the per-core sum";
    }
    if (received != r.packets_delivered)
    {
        return "delivered packets differ from the per-core sum";
    }
    if (finish != r.makespan_cycles)
    {
        return "makespan differs from the latest core finish";
    }
    if (r.totals[OpClass::noc_hop] != r.noc_hops)
    {
        return "noc_hop counter differs from link traversals";
    }
    return {};
}

SimResult run_simulation(const BenchmarkConfig &cfg, bool record_trace)
{
    cfg.validate();
    return run_simulation(cfg, cfg.effective_network(), record_trace);
}

SimResult run_simulation(const BenchmarkConfig &cfg, const Network &net,
        bool record_trace)
{
    const MeshTopology topo(cfg.mesh_width, cfg.mesh_height);
    const Mapping mapping =
            assign_layers(net.spec, topo, cfg.mapping, cfg.capacity_words);
    const std::vector<Stimulus> steps = make_stimuli(cfg, net.spec);
    SimOptions opts;
    opts.variant = cfg.variant;
    opts.group = cfg.group;
    opts.table = cfg.cost_table;
    opts.record_trace = record_trace;
    return simulate(net, mapping, opts, steps);
}

SimReport run_benchmark(const BenchmarkConfig &cfg)
{
    cfg.validate();
    const Network net = cfg.effective_network();
    return make_report(cfg, net.spec, run_simulation(cfg, net));
}

std::vector<ComparisonRow> compare_variants(const BenchmarkConfig &cfg,
        const std::vector<VariantRun> &runs)
{
    if (runs.size() < 2)
    {
        throw ConfigError("compare_variants needs at least two runs");
    }
    std::vector<ComparisonRow> rows;
    for (const VariantRun &run : runs)
    {
        BenchmarkConfig c = cfg;
        c.variant = run.variant;
        c.group = run.group;
        const SimReport r = run_benchmark(c);
        ComparisonRow row;
        row.label = fmt::format("{} G={}", to_string(run.variant), run.group);
        row.variant = run.variant;
        row.group = run.group;
        row.energy_uj = r.energy_per_inference_uj;
        row.latency_us = r.latency_per_inference_us;
        rows.push_back(row);
    }
    for (ComparisonRow &row : rows)
    {
        row.energy_ratio = rows.front().energy_uj > 0.0
                ? row.energy_uj / rows.front().energy_uj
                : 1.0;
        row.latency_ratio = rows.front().latency_us > 0.0
                ? row.latency_us / rows.front().latency_us
                : 1.0;
    }
    return rows;
}

std::vector<SweepEntry> sweep_optimizations(const BenchmarkConfig &cfg,
        const std::vector<std::uint32_t> &groups, const std::vector<SpikeMode> &modes,
        const std::vector<QuantKind> &schemes)
{
    std::vector<SweepEntry> out;
    for (std::uint32_t g : groups)
    {
        for (SpikeMode m : modes)
        {
            for (QuantKind q : schemes)
            {
                BenchmarkConfig c = cfg;
                c.group = g;
                c.spike_mode = m;
                c.weight_scheme = q;
                out.push_back(SweepEntry{g, m, q, run_benchmark(c)});
            }
        }
    }
    return out;
}

namespace {

std::size_t variant_slot(VariantTag v)
{
    return static_cast<std::size_t>(v);
}

} // namespace

ReferenceWorkload::ReferenceWorkload(BenchmarkConfig cfg, ReferenceTargets targets)
        : cfg_(std::move(cfg))
        , targets_(std::move(targets))
{
    cfg_.validate();
    const NetworkSpec base = cfg_.effective_spec();
    const SpikeMode mode = base.input_mode;
    const QuantKind scheme = base.layers.empty() ? QuantKind::bf16
                                                 : base.layers.front().weight_scheme;
    // Slots 0-2: the three variants ungrouped; 3-6: the optimisation points.
    for (VariantTag v : {VariantTag::v1, VariantTag::v2, VariantTag::v3})
    {
        runs_.push_back(Run{v, 1, mode, scheme});
    }
    const std::uint32_t g = targets_.grouped_size;
    runs_.push_back(Run{VariantTag::v3, g, SpikeMode::graded, QuantKind::bf16});
    runs_.push_back(Run{VariantTag::v3, g, SpikeMode::graded, QuantKind::int4});
    runs_.push_back(Run{VariantTag::v3, g, SpikeMode::binary, QuantKind::bf16});
    runs_.push_back(Run{VariantTag::v3, 1, SpikeMode::graded, QuantKind::bf16});
    for (const Run &r : runs_)
    {
        NetworkDescription d = cfg_.network;
        d.spec = apply_overrides(cfg_.network.spec, r.mode, r.scheme, cfg_.conv_style);
        networks_.push_back(d.materialize());
    }
}

ReferenceWorkload::Sample ReferenceWorkload::sample(std::size_t run, const CostTable &table)
{
    std::array<double, kOpClassCount + 1> key{};
    std::copy(table.cycles.begin(), table.cycles.end(), key.begin());
    key[kOpClassCount] = table.clock_mhz;
    auto &slot = cache_[key];
    slot.resize(runs_.size());
    if (!slot[run])
    {
        BenchmarkConfig c = cfg_;
        c.variant = runs_[run].variant;
        c.group = runs_[run].group;
        c.cost_table = table;
        const SimResult r = run_simulation(c, networks_[run]);
        slot[run] = Sample{r.totals, r.makespan};
    }
    return *slot[run];
}

double ReferenceWorkload::energy(std::size_t run, const CostTable &table)
{
    return evaluate(sample(run, table).totals, table).energy_uj / cfg_.repetitions;
}

double ReferenceWorkload::latency(std::size_t run, const CostTable &table)
{
    return cycles_to_us(sample(run, table).makespan, table) / cfg_.repetitions;
}

ReferenceMetrics ReferenceWorkload::measure(const CostTable &table)
{
    ReferenceMetrics m;
    for (VariantTag v : targets_.variants)
    {
        const std::size_t i = variant_slot(v);
        m.energy_uj[i] = energy(i, table);
        m.latency_us[i] = latency(i, table);
    }
    if (targets_.v3_scalar_energy_uj > 0.0)
    {
        const CostBreakdown b = evaluate(sample(2, table).totals, table);
        m.v3_scalar_energy_uj =
                (b.energy_uj_by_class[static_cast<std::size_t>(OpClass::riscv_instr)]
                        + b.energy_uj_by_class[static_cast<std::size_t>(OpClass::imem_fetch)])
                / cfg_.repetitions;
        m.v3_scalar_share = m.v3_scalar_energy_uj * cfg_.repetitions / b.energy_uj;
    }
    if (targets_.grouping_gain > 0.0 || targets_.int4_reduction > 0.0
            || targets_.binary_reduction > 0.0)
    {
        const double grouped = energy(3, table);
        m.grouping_energy_gain = energy(6, table) / grouped;
        m.grouping_latency_gain = latency(6, table) / latency(3, table);
        m.int4_reduction = 1.0 - energy(4, table) / grouped;
        m.binary_reduction = 1.0 - energy(5, table) / grouped;
    }
    return m;
}

std::vector<CalibrationTarget> ReferenceWorkload::targets() const
{
    std::vector<CalibrationTarget> t;
    for (VariantTag v : targets_.variants)
    {
        const std::size_t i = variant_slot(v);
        t.push_back({fmt::format("{}.energy_uj", to_string(v)), targets_.energy_uj[i], 1.0});
        t.push_back({fmt::format("{}.latency_us", to_string(v)), targets_.latency_us[i], 1.0});
    }
    if (targets_.v3_scalar_energy_uj > 0.0)
    {
        t.push_back({"v3.scalar_energy_uj", targets_.v3_scalar_energy_uj, 0.5});
    }
    if (targets_.grouping_gain > 0.0)
    {
        t.push_back({"grouping.energy_gain", targets_.grouping_gain, 1.0});
        t.push_back({"grouping.latency_gain", targets_.grouping_gain, 1.0});
    }
    if (targets_.int4_reduction > 0.0)
    {
        t.push_back({"int4.energy_reduction", targets_.int4_reduction, 1.0});
    }
    if (targets_.binary_reduction > 0.0)
    {
        t.push_back({"binary.energy_reduction", targets_.binary_reduction, 1.0});
    }
    return t;
}

std::vector<double> ReferenceWorkload::values(const ReferenceMetrics &m) const
{
    std::vector<double> v;
    for (VariantTag tag : targets_.variants)
    {
        v.push_back(m.energy_uj[variant_slot(tag)]);
        v.push_back(m.latency_us[variant_slot(tag)]);
    }
    if (targets_.v3_scalar_energy_uj > 0.0)
    {
        v.push_back(m.v3_scalar_energy_uj);
    }
    if (targets_.grouping_gain > 0.0)
    {
        v.push_back(m.grouping_energy_gain);
        v.push_back(m.grouping_latency_gain);
    }
    if (targets_.int4_reduction > 0.0)
    {
        v.push_back(m.int4_reduction);
    }
    if (targets_.binary_reduction > 0.0)
    {
        v.push_back(m.binary_reduction);
    }
    return v;
}

CalibrationResult calibrate_benchmark(const BenchmarkConfig &cfg,
        const ReferenceTargets &targets, CalibrationOptions options)
{
    ReferenceWorkload work(cfg, targets);
    const bool extras = targets.v3_scalar_energy_uj > 0.0 || targets.grouping_gain > 0.0
            || targets.int4_reduction > 0.0 || targets.binary_reduction > 0.0;
    if (targets.variants.size() <= 1 && !extras)
    {
        options.scale_only = true;
    }
    return calibrate(cfg.cost_table, work.targets(),
            [&](const CostTable &t) { return work.values(work.measure(t)); }, options);
}

} // namespace nmsim

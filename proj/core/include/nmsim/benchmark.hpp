#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmsim/calibration.hpp"
#include "nmsim/config.hpp"
#include "nmsim/simulator.hpp"

namespace nmsim {

/// Generated stimuli pick exactly round(density * input_dim) distinct inputs
/// (at least one) per step; graded values are U[0.5, 1) draws rounded to
/// bf16, so 1.0 can occur.
/// Step r uses seed + r. File stimuli hold one row per step.
std::vector<Stimulus> make_stimuli(const BenchmarkConfig &cfg,
        const NetworkSpec &spec);

struct SimReport
{
    std::string name;
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
    SpikeMode spike_mode = SpikeMode::graded;
    std::vector<QuantKind> weight_schemes; // per layer
    MappingPolicy mapping = MappingPolicy::one_layer_per_core;
    std::uint32_t mesh_width = 0;
    std::uint32_t mesh_height = 0;
    std::uint64_t stimulus_seed = 0;
    std::uint32_t repetitions = 1;
    CostTable table;

    double energy_uj = 0.0;
    double latency_us = 0.0;
    double energy_per_inference_uj = 0.0;
    double latency_per_inference_us = 0.0;
    std::array<double, kOpClassCount> energy_by_class_uj{};
    CostCounters totals;
    Cycle makespan_cycles = 0;
    std::vector<CoreReport> cores;

    std::uint64_t input_events = 0;
    std::uint64_t packets_emitted = 0;
    std::uint64_t packets_delivered = 0;
    std::uint64_t noc_hops = 0;
    std::uint64_t synaptic_ops = 0;
    /// Synaptic operations per delivered packet.
    double ops_per_packet = 0.0;
    std::vector<std::uint64_t> layer_spikes; // summed over steps

    /// Scalar-core (riscv_instr + imem_fetch) share of total energy.
    double scalar_energy_share() const;
};

SimReport make_report(const BenchmarkConfig &cfg, const NetworkSpec &spec,
        const SimResult &result);

/// Empty when every total equals the sum of its breakdown.
std::string check_report(const SimReport &report);

/// Full pipeline: network, mapping, tables, stimulus, simulation, costs.
SimResult run_simulation(const BenchmarkConfig &cfg, bool record_trace = false);
/// Same, with the network already built from cfg.effective_spec().
SimResult run_simulation(const BenchmarkConfig &cfg, const Network &net,
        bool record_trace = false);
SimReport run_benchmark(const BenchmarkConfig &cfg);

struct VariantRun
{
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
};

struct ComparisonRow
{
    std::string label;
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
    double energy_uj = 0.0;
    double latency_us = 0.0;
    /// This row divided by the first row.
    double energy_ratio = 1.0;
    double latency_ratio = 1.0;
};

/// Needs at least two runs.
std::vector<ComparisonRow> compare_variants(const BenchmarkConfig &cfg,
        const std::vector<VariantRun> &runs);

struct SweepEntry
{
    std::uint32_t group = 1;
    SpikeMode spike_mode = SpikeMode::graded;
    QuantKind weight_scheme = QuantKind::bf16;
    SimReport report;
};

/// Group sizes x spike modes x weight schemes, in that nesting order.
std::vector<SweepEntry> sweep_optimizations(const BenchmarkConfig &cfg,
        const std::vector<std::uint32_t> &groups = {1, 4},
        const std::vector<SpikeMode> &modes = {SpikeMode::binary, SpikeMode::graded},
        const std::vector<QuantKind> &schemes = {QuantKind::bf16, QuantKind::int8,
                QuantKind::int4});

/// Aggregate figures the calibration aims at, per inference.
struct ReferenceTargets
{
    std::array<double, 3> energy_uj{34.0, 7.0, 3.0};     // V1, V2, V3
    std::array<double, 3> latency_us{7000.0, 1100.0, 550.0};
    std::vector<VariantTag> variants{VariantTag::v1, VariantTag::v2, VariantTag::v3};
    /// Scalar-core energy of V3 (uJ); 0 disables the target.
    double v3_scalar_energy_uj = 0.2;
    /// Optimisation effects at the grouped operating point (V3, G = 4):
    /// ungrouped / grouped energy and latency, int4 and binary energy
    /// reductions relative to graded bf16. 0 disables a target.
    double grouping_gain = 2.0;
    double int4_reduction = 0.4;
    double binary_reduction = 0.1;
    std::uint32_t grouped_size = 4;
};

/// Measured counterparts of the reference targets under one cost table.
struct ReferenceMetrics
{
    std::array<double, 3> energy_uj{};
    std::array<double, 3> latency_us{};
    double v3_scalar_energy_uj = 0.0;
    double v3_scalar_share = 0.0;
    double grouping_energy_gain = 0.0;
    double grouping_latency_gain = 0.0;
    double int4_reduction = 0.0;
    double binary_reduction = 0.0;
};

/// Runs the benchmark under several settings and caches the cost counters,
/// which do not depend on the energy side of the table.
class ReferenceWorkload
{
public:
    ReferenceWorkload(BenchmarkConfig cfg, ReferenceTargets targets = {});

    ReferenceMetrics measure(const CostTable &table);
    std::vector<CalibrationTarget> targets() const;
    /// Values aligned with targets().
    std::vector<double> values(const ReferenceMetrics &m) const;

    const BenchmarkConfig &config() const { return cfg_; }

private:
    struct Run
    {
        VariantTag variant;
        std::uint32_t group;
        SpikeMode mode;
        QuantKind scheme;
    };
    struct Sample
    {
        CostCounters totals;
        Cycle makespan = 0;
    };
    Sample sample(std::size_t run, const CostTable &table);
    double energy(std::size_t run, const CostTable &table);
    double latency(std::size_t run, const CostTable &table);

    BenchmarkConfig cfg_;
    ReferenceTargets targets_;
    std::vector<Run> runs_;
    std::vector<Network> networks_;
    std::map<std::array<double, kOpClassCount + 1>, std::vector<std::optional<Sample>>>
            cache_;
};

/// Calibrates the cost table of cfg against the targets. With a single
/// variant and no extra targets only the two global scales move.
CalibrationResult calibrate_benchmark(const BenchmarkConfig &cfg,
        const ReferenceTargets &targets = {}, CalibrationOptions options = {});

} // namespace nmsim

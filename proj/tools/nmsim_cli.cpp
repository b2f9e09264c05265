// Batch front end: run, compare, sweep, calibrate, attention.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nmsim/attention.hpp"
#include "nmsim/benchmark.hpp"
#include "nmsim/config.hpp"
#include "nmsim/error.hpp"
#include "nmsim/report.hpp"

namespace fs = std::filesystem;
using namespace nmsim;

namespace {

struct Common
{
    std::string config;
    std::string variant;
    std::uint32_t group = 0;
    std::string weights;
    std::string spikes;
    std::string conv;
    std::string cost_table;
    bool calibrate = false;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App *app, Common &c)
{
    app->add_option("--config", c.config, "Benchmark config (YAML)");
    app->add_option("--variant", c.variant, "Core variant")
            ->check(CLI::IsMember({"v1", "v2", "v3"}));
    app->add_option("--group", c.group, "Spike group size")->check(CLI::PositiveNumber);
    app->add_option("--weights", c.weights, "Weight scheme")
            ->check(CLI::IsMember({"bf16", "int8", "int4"}));
    app->add_option("--spikes", c.spikes, "Spike mode")
            ->check(CLI::IsMember({"binary", "graded"}));
    app->add_option("--conv", c.conv, "Conv execution style")
            ->check(CLI::IsMember({"stateful", "depth-first"}));
    app->add_option("--cost-table", c.cost_table, "Cost table (key = value)");
    app->add_flag("--calibrate", c.calibrate, "Calibrate the cost table first");
    app->add_option("--seed", c.seed, "Stimulus seed");
    app->add_option("--out", c.out, "Output directory");
}

BenchmarkConfig load_config(const Common &c)
{
    BenchmarkConfig cfg;
    if (!c.config.empty())
    {
        cfg = load_benchmark_config(resolve_config_path(c.config, fs::current_path()));
    }
    else if (const char *dir = std::getenv(kConfigDirEnv);
             dir && *dir && fs::exists(fs::path(dir) / "benchmark.yaml"))
    {
        cfg = load_benchmark_config(fs::path(dir) / "benchmark.yaml");
    }
    else
    {
        cfg = default_benchmark_config();
    }
    if (!c.variant.empty())
    {
        cfg.variant = parse_variant(c.variant);
    }
    if (c.group != 0)
    {
        cfg.group = c.group;
    }
    if (!c.weights.empty())
    {
        cfg.weight_scheme = parse_quant_kind(c.weights);
    }
    if (!c.spikes.empty())
    {
        cfg.spike_mode = parse_spike_mode(c.spikes);
    }
    if (!c.conv.empty())
    {
        cfg.conv_style = parse_execution_style(c.conv);
    }
    if (!c.cost_table.empty())
    {
        cfg.cost_table_path = resolve_config_path(c.cost_table, fs::current_path()).string();
        cfg.cost_table = load_cost_table(cfg.cost_table_path);
    }
    if (c.seed)
    {
        cfg.stimulus.seed = *c.seed;
    }
    cfg.validate();
    return cfg;
}

void write_file(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
}

/// Writes into --out when given, otherwise prints.
void emit(const Common &c, const std::string &file, const std::string &text)
{
    if (c.out.empty())
    {
        std::cout << text;
        return;
    }
    fs::create_directories(c.out);
    write_file(fs::path(c.out) / file, text);
}

CalibrationResult calibrate_config(BenchmarkConfig &cfg, const Common &c)
{
    CalibrationResult r = calibrate_benchmark(cfg);
    std::cerr << r.summary();
    cfg.cost_table = r.table;
    if (!c.out.empty())
    {
        fs::create_directories(c.out);
        save_cost_table(r.table, (fs::path(c.out) / "cost_table.txt").string());
        write_file(fs::path(c.out) / "calibration.json", calibration_to_json(r));
    }
    return r;
}

std::vector<VariantRun> parse_runs(const std::vector<std::string> &specs,
        std::uint32_t default_group)
{
    std::vector<VariantRun> runs;
    for (const std::string &s : specs)
    {
        const auto colon = s.find(':');
        VariantRun r;
        r.variant = parse_variant(s.substr(0, colon));
        r.group = default_group;
        if (colon != std::string::npos)
        {
            r.group = static_cast<std::uint32_t>(std::stoul(s.substr(colon + 1)));
        }
        runs.push_back(r);
    }
    return runs;
}

int run_main(int argc, char **argv)
{
    CLI::App app{"Event-driven neuromorphic many-core simulator"};
    app.require_subcommand(1);

    Common run_opts, cmp_opts, sweep_opts, cal_opts, att_opts;
    bool trace = false;
    std::vector<std::string> runs{"v1", "v2", "v3"};
    double tolerance = 0.25;

    auto *run = app.add_subcommand("run", "Run one benchmark and write its report");
    add_common(run, run_opts);
    run->add_flag("--trace", trace, "Also write the event trace");

    auto *cmp = app.add_subcommand("compare", "Compare core variants");
    add_common(cmp, cmp_opts);
    cmp->add_option("--runs", runs, "Runs as variant[:group], e.g. v2:4 v2:1")
            ->delimiter(',');

    auto *sweep = app.add_subcommand("sweep", "Group size x spike mode x weight scheme grid");
    add_common(sweep, sweep_opts);

    auto *cal = app.add_subcommand("calibrate", "Fit the cost table to the reference totals");
    add_common(cal, cal_opts);
    cal->add_option("--tolerance", tolerance, "Largest accepted relative residual of the "
                                              "variant totals");

    auto *att = app.add_subcommand("attention", "Hard-attention pipeline vs full frame");
    add_common(att, att_opts);

    CLI11_PARSE(app, argc, argv);

    if (*run)
    {
        BenchmarkConfig cfg = load_config(run_opts);
        if (run_opts.calibrate)
        {
            calibrate_config(cfg, run_opts);
        }
        const Network net = cfg.effective_network();
        const SimResult result = run_simulation(cfg, net, trace);
        const SimReport report = make_report(cfg, net.spec, result);
        emit(run_opts, "report.json", report_to_json(report));
        if (trace)
        {
            std::string text;
            for (const std::string &line : result.trace)
            {
                text += line + "\n";
            }
            emit(run_opts, "trace.txt", text);
        }
        return 0;
    }
    if (*cmp)
    {
        BenchmarkConfig cfg = load_config(cmp_opts);
        if (cmp_opts.calibrate)
        {
            calibrate_config(cfg, cmp_opts);
        }
        const auto rows = compare_variants(cfg, parse_runs(runs, cfg.group));
        std::cout << comparison_table(rows);
        if (!cmp_opts.out.empty())
        {
            emit(cmp_opts, "compare.csv", comparison_to_csv(rows));
        }
        return 0;
    }
    if (*sweep)
    {
        BenchmarkConfig cfg = load_config(sweep_opts);
        if (sweep_opts.calibrate)
        {
            calibrate_config(cfg, sweep_opts);
        }
        const auto entries = sweep_optimizations(cfg);
        emit(sweep_opts, "sweep.csv", sweep_to_csv(entries));
        if (!sweep_opts.out.empty())
        {
            for (const SweepEntry &e : entries)
            {
                emit(sweep_opts,
                        fmt::format("report_g{}_{}_{}.json", e.group, to_string(e.spike_mode),
                                to_string(e.weight_scheme)),
                        report_to_json(e.report));
            }
        }
        return 0;
    }
    if (*cal)
    {
        BenchmarkConfig cfg = load_config(cal_opts);
        const CalibrationResult r = calibrate_config(cfg, cal_opts);
        if (cal_opts.out.empty())
        {
            std::cout << dump_cost_table(r.table);
        }
        double worst = 0.0;
        for (const TargetResidual &t : r.residuals)
        {
            if (t.name.ends_with("energy_uj") || t.name.ends_with("latency_us"))
            {
                worst = std::max(worst, std::fabs(t.relative));
            }
        }
        if (worst > tolerance)
        {
            std::cerr << fmt::format("calibration: residual {:.1f}% exceeds {:.1f}%\n",
                    100.0 * worst, 100.0 * tolerance);
            return static_cast<int>(ErrorKind::calibration);
        }
        return 0;
    }
    if (*att)
    {
        BenchmarkConfig cfg = load_config(att_opts);
        if (att_opts.calibrate)
        {
            calibrate_config(cfg, att_opts);
        }
        AttentionConfig acfg = default_attention_config();
        acfg.variant = cfg.variant;
        acfg.group = cfg.group;
        acfg.table = cfg.cost_table;
        const EventFrame frame = make_toy_frame(cfg.stimulus.seed, 64, 64, 16, 5, 0.3, 0.05);
        const AttentionResult r = run_hard_attention(acfg, frame);
        std::string text;
        text += fmt::format("frame events {}  roi cell {}  crop ({}, {})  cropped events {}\n",
                frame.events.size(), r.roi_cell, r.crop_y, r.crop_x, r.cropped_events);
        for (const StageCost &s : r.attention.stages)
        {
            text += fmt::format("  attention/{:<12} {:>10.4f} uJ {:>10.2f} us\n", s.name,
                    s.energy_uj, s.latency_us);
        }
        text += fmt::format("attention  {:>10.4f} uJ {:>10.2f} us\n", r.attention.energy_uj,
                r.attention.latency_us);
        text += fmt::format("baseline   {:>10.4f} uJ {:>10.2f} us\n", r.baseline.energy_uj,
                r.baseline.latency_us);
        text += fmt::format("gain       {:>10.3f} x  {:>10.3f} x\n",
                r.baseline.energy_uj / r.attention.energy_uj,
                r.baseline.latency_us / r.attention.latency_us);
        emit(att_opts, "attention.txt", text);
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run_main(argc, argv);
    }
    catch (const Error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "nmsim/report.hpp"

#include <charconv>

#include <fmt/format.h>
#include <json.hpp>

namespace nmsim {

using nlohmann::json;

namespace {

json counters_json(const CostCounters &c)
{
    json j = json::object();
    for (OpClass op : kAllOpClasses)
    {
        j[std::string(to_string(op))] = c[op];
    }
    return j;
}

json table_json(const CostTable &t)
{
    json energy = json::object(), cycles = json::object();
    for (OpClass op : kAllOpClasses)
    {
        energy[std::string(to_string(op))] = t.energy(op);
        cycles[std::string(to_string(op))] = t.cycle(op);
    }
    return {{"energy_pj", energy}, {"cycles", cycles}, {"clock_mhz", t.clock_mhz}};
}

std::string num(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

std::string report_to_json(const SimReport &r)
{
    json j;
    j["schema"] = kReportSchema;
    json cfg;
    cfg["name"] = r.name;
    cfg["variant"] = std::string(to_string(r.variant));
    cfg["group"] = r.group;
    cfg["spike_mode"] = std::string(to_string(r.spike_mode));
    json schemes = json::array();
    for (QuantKind q : r.weight_schemes)
    {
        schemes.push_back(std::string(to_string(q)));
    }
    cfg["weight_schemes"] = schemes;
    cfg["mapping"] = std::string(to_string(r.mapping));
    cfg["mesh"] = {r.mesh_width, r.mesh_height};
    cfg["stimulus_seed"] = r.stimulus_seed;
    cfg["repetitions"] = r.repetitions;
    cfg["cost_table"] = table_json(r.table);
    j["config"] = cfg;

    json totals;
    totals["energy_uj"] = r.energy_uj;
    totals["latency_us"] = r.latency_us;
    totals["energy_per_inference_uj"] = r.energy_per_inference_uj;
    totals["latency_per_inference_us"] = r.latency_per_inference_us;
    totals["makespan_cycles"] = r.makespan_cycles;
    totals["scalar_energy_share"] = r.scalar_energy_share();
    j["totals"] = totals;

    json by_class = json::object();
    for (OpClass op : kAllOpClasses)
    {
        by_class[std::string(to_string(op))] = {
                {"count", r.totals[op]},
                {"energy_uj", r.energy_by_class_uj[static_cast<std::size_t>(op)]}};
    }
    j["op_classes"] = by_class;

    json cores = json::array();
    for (const CoreReport &c : r.cores)
    {
        cores.push_back({{"core", c.core}, {"counters", counters_json(c.counters)},
                {"energy_uj", c.energy_uj}, {"busy_cycles", c.busy_cycles},
                {"stall_cycles", c.stall_cycles}, {"finish_cycle", c.finish},
                {"static_words", c.static_words}, {"peak_words", c.peak_words},
                {"packets_received", c.packets_received},
                {"synaptic_ops", c.synaptic_ops}});
    }
    j["cores"] = cores;

    j["events"] = {{"input_events", r.input_events},
            {"packets_emitted", r.packets_emitted},
            {"packets_delivered", r.packets_delivered}, {"noc_hops", r.noc_hops},
            {"synaptic_ops", r.synaptic_ops}, {"ops_per_packet", r.ops_per_packet},
            {"layer_spikes", r.layer_spikes}};
    return j.dump(2) + "\n";
}

std::string comparison_to_csv(const std::vector<ComparisonRow> &rows)
{
    std::string out = fmt::format("# schema: {}\n", kCompareSchema);
    out += "label,variant,group,energy_uj,latency_us,energy_ratio,latency_ratio\n";
    for (const ComparisonRow &r : rows)
    {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.label, to_string(r.variant),
                r.group, num(r.energy_uj), num(r.latency_us), num(r.energy_ratio),
                num(r.latency_ratio));
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepEntry> &entries)
{
    std::string out = fmt::format("# schema: {}\n", kSweepSchema);
    out += "variant,group,spike_mode,weight_scheme,energy_uj,latency_us,"
           "input_events,packets_delivered,synaptic_ops,dmem_read_word,npe_op\n";
    for (const SweepEntry &e : entries)
    {
        const SimReport &r = e.report;
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.variant),
                e.group, to_string(e.spike_mode), to_string(e.weight_scheme),
                num(r.energy_per_inference_uj), num(r.latency_per_inference_us),
                r.input_events, r.packets_delivered, r.synaptic_ops,
                r.totals[OpClass::dmem_read_word], r.totals[OpClass::npe_op]);
    }
    return out;
}

std::string comparison_table(const std::vector<ComparisonRow> &rows)
{
    std::string out = fmt::format("{:<10} {:>12} {:>12} {:>9} {:>9}\n", "run",
            "energy_uJ", "latency_us", "E/E0", "T/T0");
    for (const ComparisonRow &r : rows)
    {
        out += fmt::format("{:<10} {:>12.4f} {:>12.2f} {:>9.3f} {:>9.3f}\n", r.label,
                r.energy_uj, r.latency_us, r.energy_ratio, r.latency_ratio);
    }
    return out;
}

std::string calibration_to_json(const CalibrationResult &result)
{
    json j;
    j["schema"] = "nmsim.calibration/1";
    j["loss"] = result.loss;
    j["evaluations"] = result.evaluations;
    j["max_relative_residual"] = result.max_relative_residual();
    json res = json::array();
    for (const TargetResidual &r : result.residuals)
    {
        res.push_back({{"name", r.name}, {"target", r.target}, {"value", r.value},
                {"relative", r.relative}});
    }
    j["residuals"] = res;
    j["cost_table"] = table_json(result.table);
    return j.dump(2) + "\n";
}

} // namespace nmsim

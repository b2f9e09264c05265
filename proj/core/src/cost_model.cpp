#include "nmsim/cost_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

namespace {

constexpr std::string_view kSchema = "nmsim.cost_table/1";

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view key)
{
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    {
        throw ConfigError(fmt::format(
                "cost table: bad value '{}' for '{}'", text, key));
    }
    return v;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
    {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

CostTable CostTable::defaults()
{
    CostTable t;
    auto set = [&](OpClass op, double e, double c) {
        t.energy(op) = e;
        t.cycle(op) = c;
    };
    set(OpClass::riscv_instr, 30.0, 0.75);
    set(OpClass::imem_fetch, 5.0, 0.25);
    set(OpClass::dmem_read_word, 15.0, 0.0625);
    set(OpClass::dmem_write_word, 10.0, 0.25);
    set(OpClass::npe_op, 1.5, 0.0625);
    set(OpClass::loopctrl_step, 0.5, 0.5);
    set(OpClass::noc_hop, 1.0, 1.0);
    set(OpClass::packet_inject, 1.0, 0.5);
    t.clock_mhz = 100.0;
    return t;
}

std::string CostTable::violation() const
{
    for (OpClass op : kAllOpClasses)
    {
        if (!(energy(op) > 0.0) || !std::isfinite(energy(op)))
        {
            return fmt::format("energy.{} must be positive", to_string(op));
        }
        if (!(cycle(op) > 0.0) || !std::isfinite(cycle(op)))
        {
            return fmt::format("cycles.{} must be positive", to_string(op));
        }
    }
    if (!(clock_mhz > 0.0))
    {
        return "clock_mhz must be positive";
    }
    // Tables scaled as a whole must stay valid, so equality survives rounding.
    constexpr double slack = 1.0 + 1e-9;
    if (energy(OpClass::dmem_read_word) * slack < 10.0 * energy(OpClass::npe_op))
    {
        return "energy.dmem_read_word must be at least 10x energy.npe_op";
    }
    if (energy(OpClass::loopctrl_step) * 10.0 > energy(OpClass::riscv_instr) * slack)
    {
        return "energy.loopctrl_step must be at most energy.riscv_instr / 10";
    }
    return {};
}

void CostTable::validate() const
{
    if (auto v = violation(); !v.empty())
    {
        throw ConfigError("cost table: " + v);
    }
}

std::string dump_cost_table(const CostTable &table)
{
    std::string out = fmt::format("schema = {}\n", kSchema);
    out += fmt::format("clock_mhz = {}\n", format_double(table.clock_mhz));
    for (OpClass op : kAllOpClasses)
    {
        out += fmt::format("energy.{} = {}\n", to_string(op),
                format_double(table.energy(op)));
    }
    for (OpClass op : kAllOpClasses)
    {
        out += fmt::format("cycles.{} = {}\n", to_string(op),
                format_double(table.cycle(op)));
    }
    return out;
}

CostTable parse_cost_table(std::string_view text)
{
    CostTable t;
    std::array<bool, kOpClassCount> have_e{}, have_c{};
    bool have_clock = false;
    std::size_t line_no = 0;
    while (!text.empty())
    {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{}
                                            : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty())
        {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError(fmt::format(
                    "cost table line {}: expected key = value", line_no));
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "schema")
        {
            if (value != kSchema)
            {
                throw ConfigError(fmt::format(
                        "cost table: unsupported schema '{}'", value));
            }
        }
        else if (key == "clock_mhz")
        {
            t.clock_mhz = parse_double(value, key);
            have_clock = true;
        }
        else if (key.starts_with("energy."))
        {
            const OpClass op = parse_op_class(key.substr(7));
            t.energy(op) = parse_double(value, key);
            have_e[static_cast<std::size_t>(op)] = true;
        }
        else if (key.starts_with("cycles."))
        {
            const OpClass op = parse_op_class(key.substr(7));
            t.cycle(op) = parse_double(value, key);
            have_c[static_cast<std::size_t>(op)] = true;
        }
        else
        {
            throw ConfigError(fmt::format("cost table: unknown key '{}'", key));
        }
    }
    if (!have_clock)
    {
        throw ConfigError("cost table: missing clock_mhz");
    }
    for (OpClass op : kAllOpClasses)
    {
        if (!have_e[static_cast<std::size_t>(op)]
                || !have_c[static_cast<std::size_t>(op)])
        {
            throw ConfigError(fmt::format(
                    "cost table: missing entries for {}", to_string(op)));
        }
    }
    t.validate();
    return t;
}

CostTable load_cost_table(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError(fmt::format("cannot read cost table '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_cost_table(ss.str());
}

void save_cost_table(const CostTable &table, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ConfigError(fmt::format("cannot write cost table '{}'", path));
    }
    out << dump_cost_table(table);
}

CostBreakdown evaluate(const CostCounters &counters, const CostTable &table)
{
    CostBreakdown b;
    double cycles = 0.0;
    for (OpClass op : kAllOpClasses)
    {
        const double n = static_cast<double>(counters[op]);
        const double e = n * table.energy(op);
        b.energy_uj_by_class[static_cast<std::size_t>(op)] = e * 1e-6;
        b.energy_uj += e * 1e-6;
        cycles += n * table.cycle(op);
    }
    b.serial_latency_us = cycles / table.clock_mhz;
    return b;
}

Cycle work_cycles(const CostCounters &counters, const CostTable &table)
{
    double cycles = 0.0;
    for (OpClass op : kAllOpClasses)
    {
        cycles += static_cast<double>(counters[op]) * table.cycle(op);
    }
    return static_cast<Cycle>(std::ceil(cycles - 1e-9));
}

} // namespace nmsim

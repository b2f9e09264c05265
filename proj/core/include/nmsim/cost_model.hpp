#pragma once

#include <array>
#include <string>
#include <string_view>

#include "nmsim/core_model.hpp"

namespace nmsim {

/// Energy (pJ) and cycle cost per op-class occurrence, plus the clock.
struct CostTable
{
    std::array<double, kOpClassCount> energy_pj{};
    std::array<double, kOpClassCount> cycles{};
    double clock_mhz = 100.0;

    double energy(OpClass op) const
    {
        return energy_pj[static_cast<std::size_t>(op)];
    }
    double &energy(OpClass op) { return energy_pj[static_cast<std::size_t>(op)]; }
    double cycle(OpClass op) const
    {
        return cycles[static_cast<std::size_t>(op)];
    }
    double &cycle(OpClass op) { return cycles[static_cast<std::size_t>(op)]; }

    /// Uncalibrated defaults; see configs/ for the calibrated table.
    static CostTable defaults();

    /// Empty string when valid, otherwise the first violated constraint:
    /// all entries > 0, dmem read >= 10 x npe op, loop step <= riscv / 10.
    std::string violation() const;
    bool valid() const { return violation().empty(); }
    /// Throws ConfigError on violation.
    void validate() const;

    friend bool operator==(const CostTable &, const CostTable &) = default;
};

/// Flat `key = value` text. Values are written in shortest round-trip form,
/// so load(dump(t)) == t bit for bit.
std::string dump_cost_table(const CostTable &table);
CostTable parse_cost_table(std::string_view text);
CostTable load_cost_table(const std::string &path);
void save_cost_table(const CostTable &table, const std::string &path);

struct CostBreakdown
{
    double energy_uj = 0.0;
    /// Serial latency if every counted op ran back to back on one core.
    double serial_latency_us = 0.0;
    std::array<double, kOpClassCount> energy_uj_by_class{};
};

CostBreakdown evaluate(const CostCounters &counters, const CostTable &table);

/// Cycles for a work item: ceil(sum count * cycles).
Cycle work_cycles(const CostCounters &counters, const CostTable &table);

inline double cycles_to_us(Cycle cycles, const CostTable &table)
{
    return static_cast<double>(cycles) / table.clock_mhz;
}

} // namespace nmsim

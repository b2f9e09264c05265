#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nmsim/cost_model.hpp"

namespace nmsim {

struct CalibrationTarget
{
    std::string name;
    double value = 0.0;
    double weight = 1.0;
};

struct CalibrationOptions
{
    /// Every entry stays within [start / bound, start * bound].
    double bound_factor = 16.0;
    /// Log-space step sizes of the coordinate search.
    double initial_step = 0.5;
    double min_step = 0.001;
    int max_rounds = 400;
    /// Pull toward the start table, in squared log units.
    double regularization = 1e-4;
    /// Only the two global scales (all energies, all cycle costs) move.
    bool scale_only = false;
};

struct TargetResidual
{
    std::string name;
    double target = 0.0;
    double value = 0.0;
    /// value / target - 1
    double relative = 0.0;
};

struct CalibrationResult
{
    CostTable table;
    std::vector<TargetResidual> residuals;
    double loss = 0.0;
    int evaluations = 0;

    double max_relative_residual() const;
    /// One line per target: name, target, value, relative residual.
    std::string summary() const;
};

/// Returns one measured value per target, in target order.
using MeasureFn = std::function<std::vector<double>(const CostTable &)>;

/// Deterministic coordinate descent in log space over two global scales and
/// the 16 per-class energy and cycle entries, minimising
/// sum weight * log(measured / target)^2. Candidates that break the table
/// constraints (dmem read >= 10 x npe op, loop step <= riscv / 10) or leave
/// the bounds are rejected. The clock is not varied. Never throws on an
/// infeasible target set; the residuals report how close it got.
CalibrationResult calibrate(const CostTable &start,
        const std::vector<CalibrationTarget> &targets, const MeasureFn &measure,
        const CalibrationOptions &options = {});

} // namespace nmsim

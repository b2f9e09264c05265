#include "nmsim/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

double CalibrationResult::max_relative_residual() const
{
    double m = 0.0;
    for (const TargetResidual &r : residuals)
    {
        m = std::max(m, std::fabs(r.relative));
    }
    return m;
}

std::string CalibrationResult::summary() const
{
    std::string out;
    for (const TargetResidual &r : residuals)
    {
        out += fmt::format("{:<24} target {:>10.4g}  got {:>10.4g}  residual {:+.1f}%\n",
                r.name, r.target, r.value, 100.0 * r.relative);
    }
    return out;
}

namespace {

constexpr std::size_t kParams = 2 + 2 * kOpClassCount;

CostTable scaled_table(const CostTable &start, const std::vector<double> &x)
{
    CostTable t = start;
    for (std::size_t i = 0; i < kOpClassCount; ++i)
    {
        t.energy_pj[i] = start.energy_pj[i] * std::exp(x[0] + x[2 + i]);
        t.cycles[i] = start.cycles[i] * std::exp(x[1] + x[2 + kOpClassCount + i]);
    }
    return t;
}

bool in_bounds(const std::vector<double> &x, double log_bound)
{
    for (std::size_t i = 0; i < kOpClassCount; ++i)
    {
        if (std::fabs(x[0] + x[2 + i]) > log_bound + 1e-12
                || std::fabs(x[1] + x[2 + kOpClassCount + i]) > log_bound + 1e-12)
        {
            return false;
        }
    }
    return true;
}

} // namespace

CalibrationResult calibrate(const CostTable &start,
        const std::vector<CalibrationTarget> &targets, const MeasureFn &measure,
        const CalibrationOptions &options)
{
    start.validate();
    if (targets.empty())
    {
        throw ConfigError("calibrate: no targets");
    }
    for (const CalibrationTarget &t : targets)
    {
        if (!(t.value > 0.0))
        {
            throw ConfigError(fmt::format("calibrate: target '{}' must be positive", t.name));
        }
    }
    CalibrationResult result;
    const double log_bound = std::log(options.bound_factor);

    auto loss = [&](const std::vector<double> &x, std::vector<double> *values) {
        const CostTable t = scaled_table(start, x);
        std::vector<double> v = measure(t);
        ++result.evaluations;
        if (v.size() != targets.size())
        {
            throw ConfigError("calibrate: measure returned the wrong number of values");
        }
        double l = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i)
        {
            const double r = std::log(std::max(v[i], 1e-9) / targets[i].value);
            l += targets[i].weight * r * r;
        }
        for (double xi : x)
        {
            l += options.regularization * xi * xi;
        }
        if (values)
        {
            *values = std::move(v);
        }
        return l;
    };

    // Search directions: every parameter alone, plus the energy pairs tied
    // by the table constraints moved together, so the search can slide
    // along a constraint boundary instead of stalling on it.
    std::vector<std::vector<double>> dirs;
    const std::size_t active = options.scale_only ? 2 : kParams;
    for (std::size_t p = 0; p < active; ++p)
    {
        std::vector<double> d(kParams, 0.0);
        d[p] = 1.0;
        dirs.push_back(std::move(d));
    }
    if (!options.scale_only)
    {
        const auto idx = [](OpClass op) { return 2 + static_cast<std::size_t>(op); };
        for (auto [a, b] : {std::pair{OpClass::dmem_read_word, OpClass::npe_op},
                     std::pair{OpClass::riscv_instr, OpClass::loopctrl_step}})
        {
            std::vector<double> d(kParams, 0.0);
            d[idx(a)] = 1.0;
            d[idx(b)] = 1.0;
            dirs.push_back(std::move(d));
        }
    }

    std::vector<double> x(kParams, 0.0);
    double best = loss(x, nullptr);
    double step = options.initial_step;
    for (int round = 0; round < options.max_rounds && step >= options.min_step; ++round)
    {
        bool improved = false;
        for (const std::vector<double> &d : dirs)
        {
            for (double sign : {1.0, -1.0})
            {
                std::vector<double> cand = x;
                for (std::size_t p = 0; p < kParams; ++p)
                {
                    cand[p] += sign * step * d[p];
                }
                if (!in_bounds(cand, log_bound) || !scaled_table(start, cand).valid())
                {
                    continue;
                }
                const double l = loss(cand, nullptr);
                if (l < best - 1e-12)
                {
                    best = l;
                    x = std::move(cand);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved)
        {
            step *= 0.5;
        }
    }

    std::vector<double> values;
    result.loss = loss(x, &values);
    result.table = scaled_table(start, x);
    for (std::size_t i = 0; i < targets.size(); ++i)
    {
        result.residuals.push_back(TargetResidual{targets[i].name, targets[i].value,
                values[i], values[i] / targets[i].value - 1.0});
    }
    return result;
}

} // namespace nmsim

#include <gtest/gtest.h>

#include <cmath>

#include "nmsim/calibration.hpp"
#include "nmsim/error.hpp"

using namespace nmsim;

namespace {

// Two synthetic workloads whose costs are linear in the table entries.
std::vector<double> measure_linear(const CostTable &t)
{
    CostCounters a, b;
    a.account(OpClass::riscv_instr, 1000);
    a.account(OpClass::dmem_read_word, 4000);
    b.account(OpClass::npe_op, 9000);
    b.account(OpClass::dmem_read_word, 500);
    return {evaluate(a, t).energy_uj, evaluate(b, t).energy_uj,
            static_cast<double>(work_cycles(a, t))};
}

} // namespace

TEST(Calibration, ScaleOnlyHitsSingleTarget)
{
    const CostTable start = CostTable::defaults();
    const double base = measure_linear(start)[0];
    CalibrationOptions o;
    o.scale_only = true;
    const CalibrationResult r = calibrate(start, {{"a", 3.0 * base}},
            [](const CostTable &t) { return std::vector<double>{measure_linear(t)[0]}; }, o);
    EXPECT_LT(r.max_relative_residual(), 0.01);
    // Every energy scaled by the same factor.
    const double f = r.table.energy(OpClass::npe_op) / start.energy(OpClass::npe_op);
    EXPECT_NEAR(f, 3.0, 0.05);
    EXPECT_NEAR(r.table.energy(OpClass::riscv_instr) / start.energy(OpClass::riscv_instr), f,
            1e-9);
    EXPECT_EQ(r.table.clock_mhz, start.clock_mhz);
}

TEST(Calibration, RecoversAKnownTable)
{
    const CostTable start = CostTable::defaults();
    CostTable truth = start;
    truth.energy(OpClass::riscv_instr) *= 1.6;
    truth.energy(OpClass::npe_op) *= 0.7;
    truth.cycle(OpClass::riscv_instr) *= 2.0;
    ASSERT_TRUE(truth.valid());
    const std::vector<double> want = measure_linear(truth);
    const std::vector<CalibrationTarget> targets{
            {"a", want[0]}, {"b", want[1]}, {"cycles", want[2]}};
    const CalibrationResult r = calibrate(start, targets, measure_linear);
    EXPECT_LT(r.max_relative_residual(), 0.02);
    EXPECT_TRUE(r.table.valid());

    const CalibrationResult again = calibrate(start, targets, measure_linear);
    EXPECT_EQ(again.table, r.table);
    EXPECT_EQ(again.evaluations, r.evaluations);
}

TEST(Calibration, InfeasibleTargetsReportResiduals)
{
    // Two contradictory targets on the same quantity.
    const auto m = [](const CostTable &t) {
        const double v = measure_linear(t)[0];
        return std::vector<double>{v, v};
    };
    const double base = measure_linear(CostTable::defaults())[0];
    CalibrationResult r;
    ASSERT_NO_THROW(r = calibrate(CostTable::defaults(), {{"lo", base}, {"hi", 4.0 * base}}, m));
    ASSERT_EQ(r.residuals.size(), 2u);
    EXPECT_GT(r.max_relative_residual(), 0.5);
    EXPECT_LT(r.residuals[0].relative * r.residuals[1].relative, 0.0);
    EXPECT_NE(r.summary().find("hi"), std::string::npos);
}

TEST(Calibration, BoundsAndConstraintsHold)
{
    CalibrationOptions o;
    o.bound_factor = 2.0;
    const auto m = [](const CostTable &t) {
        return std::vector<double>{measure_linear(t)[1]};
    };
    const double base = m(CostTable::defaults())[0];
    const CalibrationResult r = calibrate(CostTable::defaults(), {{"b", 100.0 * base}}, m, o);
    const CostTable d = CostTable::defaults();
    for (std::size_t i = 0; i < kOpClassCount; ++i)
    {
        EXPECT_LE(r.table.energy_pj[i], 2.0 * d.energy_pj[i] * (1 + 1e-9));
        EXPECT_GE(r.table.energy_pj[i], 0.5 * d.energy_pj[i] * (1 - 1e-9));
    }
    EXPECT_TRUE(r.table.valid());
}

TEST(Calibration, BadInput)
{
    EXPECT_THROW(calibrate(CostTable::defaults(), {}, measure_linear), ConfigError);
    EXPECT_THROW(calibrate(CostTable::defaults(), {{"z", 0.0}}, measure_linear), ConfigError);
    EXPECT_THROW(calibrate(CostTable::defaults(), {{"a", 1.0}}, measure_linear), ConfigError);
}

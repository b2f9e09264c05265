#include <gtest/gtest.h>

#include "nmsim/attention.hpp"
#include "nmsim/error.hpp"

using namespace nmsim;

TEST(Attention, ToyFrameConcentratesEvents)
{
    const EventFrame f = make_toy_frame(3, 64, 64, 16, 6, 0.5, 0.0);
    ASSERT_FALSE(f.events.empty());
    for (const FrameEvent &e : f.events)
    {
        EXPECT_GE(e.y, 16u);
        EXPECT_LT(e.y, 32u);
        EXPECT_GE(e.x, 32u);
        EXPECT_LT(e.x, 48u);
    }
    EXPECT_EQ(make_toy_frame(3, 64, 64, 16, 6, 0.5, 0.0).events, f.events);
}

TEST(Attention, FindsTheObject)
{
    const AttentionConfig cfg = default_attention_config();
    for (std::uint32_t cell : {0u, 5u, 15u})
    {
        const EventFrame f = make_toy_frame(cell + 1, 64, 64, 16, cell, 0.4, 0.02);
        const AttentionResult r = run_hard_attention(cfg, f);
        EXPECT_EQ(r.roi_cell, cell);
        EXPECT_EQ(r.crop_y, (cell / 4) * 16);
        EXPECT_EQ(r.crop_x, (cell % 4) * 16);
        EXPECT_GT(r.cropped_events, 0u);
        EXPECT_LT(r.cropped_events, f.events.size());
        ASSERT_EQ(r.attention.stages.size(), 4u);
        double e = 0.0, t = 0.0;
        for (const StageCost &s : r.attention.stages)
        {
            e += s.energy_uj;
            t += s.latency_us;
        }
        EXPECT_NEAR(e, r.attention.energy_uj, 1e-12);
        EXPECT_NEAR(t, r.attention.latency_us, 1e-12);
    }
}

TEST(Attention, EmptyFrameFallsBackToCellZero)
{
    const AttentionConfig cfg = default_attention_config();
    const AttentionResult r = run_hard_attention(cfg, EventFrame{64, 64, {}});
    EXPECT_EQ(r.roi_cell, 0u);
    EXPECT_EQ(r.cropped_events, 0u);
}

TEST(Attention, CropIsClampedToTheFrame)
{
    // 40 is not a multiple of 16: the last RoI row starts at 32 but the crop
    // must stay inside the frame.
    AttentionConfig cfg = default_attention_config(40, 40, 8, 8);
    cfg.roi_size = 16;
    NetworkSpec det = dense_network_spec("d", 25, {9}, SpikeMode::graded, QuantKind::bf16);
    std::vector<float> w(25 * 9, 0.0f);
    for (std::uint32_t py = 0; py < 5; ++py)
    {
        for (std::uint32_t px = 0; px < 5; ++px)
        {
            w[(py * 5 + px) * 9 + (py / 2) * 3 + px / 2] = 1.0f;
        }
    }
    cfg.detector = build_network(det, std::vector<std::vector<float>>{w});
    NetworkSpec cls = dense_network_spec("c", 256, {10}, SpikeMode::graded, QuantKind::bf16);
    cls.input_mode = SpikeMode::binary;
    cfg.classifier = build_network(cls, WeightGenerator{});
    EventFrame f{40, 40, {}};
    for (std::uint32_t y = 34; y < 40; ++y)
    {
        for (std::uint32_t x = 34; x < 40; ++x)
        {
            f.events.push_back({y, x});
        }
    }
    const AttentionResult r = run_hard_attention(cfg, f);
    EXPECT_EQ(r.roi_cell, 8u);
    EXPECT_EQ(r.crop_y, 24u);
    EXPECT_EQ(r.crop_x, 24u);
    EXPECT_EQ(r.cropped_events, 36u);
}

TEST(Attention, DimensionErrors)
{
    EXPECT_THROW(default_attention_config(64, 64, 7, 16), ConfigError);
    EXPECT_THROW(default_attention_config(64, 64, 8, 12), ConfigError);
    AttentionConfig cfg = default_attention_config();
    EXPECT_THROW(run_hard_attention(cfg, EventFrame{32, 32, {}}), ConfigError);
    EXPECT_THROW(run_hard_attention(cfg, EventFrame{64, 64, {{64, 0}}}), ConfigError);
    cfg.classifier = cfg.baseline;
    EXPECT_THROW(run_hard_attention(cfg, EventFrame{64, 64, {}}), ConfigError);
}

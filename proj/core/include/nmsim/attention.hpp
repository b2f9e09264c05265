#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmsim/cost_model.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/netmodel.hpp"
#include "nmsim/simulator.hpp"

namespace nmsim {

struct FrameEvent
{
    std::uint32_t y = 0;
    std::uint32_t x = 0;
    friend bool operator==(const FrameEvent &, const FrameEvent &) = default;
};

/// Binary single-channel event frame, at most one event per pixel, in
/// raster order.
struct EventFrame
{
    std::uint32_t height = 64;
    std::uint32_t width = 64;
    std::vector<FrameEvent> events;
};

/// Dense events in one RoI cell plus uniform background noise elsewhere.
EventFrame make_toy_frame(std::uint64_t seed, std::uint32_t height,
        std::uint32_t width, std::uint32_t roi_size, std::uint32_t roi_cell,
        double object_density, double noise_density);

struct AttentionConfig
{
    std::uint32_t downsample = 8;
    std::uint32_t roi_size = 16;
    /// Input (h / downsample) * (w / downsample), output one per RoI cell.
    Network detector;
    /// Input roi_size^2.
    Network classifier;
    /// Same layers as the classifier on the full frame.
    Network baseline;

    // Execution platform shared by every stage.
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
    MappingPolicy mapping = MappingPolicy::one_layer_per_core;
    std::uint32_t mesh_width = 2;
    std::uint32_t mesh_height = 2;
    std::uint64_t capacity_words = kDefaultCapacityWords;
    CostTable table = CostTable::defaults();

    // Scalar-core work of the pre- and post-processing.
    std::uint32_t pool_instr_per_event = 4;
    std::uint32_t pool_instr_per_cell = 3;
    std::uint32_t argmax_instr_per_output = 2;
    std::uint32_t crop_instr_per_event = 3;
};

/// Detector whose output for RoI cell r sums the pooled cells inside r, a
/// classifier with hidden layers `hidden` and `classes` outputs on RoI crops,
/// and its full-frame baseline. Classifier weights are generated from seed.
AttentionConfig default_attention_config(std::uint32_t height = 64,
        std::uint32_t width = 64, std::uint32_t downsample = 8,
        std::uint32_t roi_size = 16, std::vector<std::uint32_t> hidden = {16},
        std::uint32_t classes = 10, std::uint64_t seed = 11);

struct StageCost
{
    std::string name;
    double energy_uj = 0.0;
    double latency_us = 0.0;
};

struct PipelineReport
{
    double energy_uj = 0.0;
    double latency_us = 0.0;
    std::vector<StageCost> stages;
    CostCounters counters;
    std::vector<Bf16> outputs; // final layer
};

struct AttentionResult
{
    PipelineReport attention;
    PipelineReport baseline;
    std::uint32_t roi_cell = 0;
    std::uint32_t crop_y = 0;
    std::uint32_t crop_x = 0;
    std::uint64_t cropped_events = 0;
};

/// Downsample (average pool on the scalar core) -> detector -> argmax RoI
/// (ties to the lowest index) -> crop, clamped to the frame -> classifier,
/// against the baseline on the full frame. Stages run back to back, so
/// latencies add. Throws ConfigError on inconsistent dimensions.
AttentionResult run_hard_attention(const AttentionConfig &cfg,
        const EventFrame &frame);

} // namespace nmsim

#include "nmsim/attention.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

EventFrame make_toy_frame(std::uint64_t seed, std::uint32_t height,
        std::uint32_t width, std::uint32_t roi_size, std::uint32_t roi_cell,
        double object_density, double noise_density)
{
    EventFrame f{height, width, {}};
    const std::uint32_t grid_w = width / roi_size;
    const std::uint32_t oy = (roi_cell / grid_w) * roi_size;
    const std::uint32_t ox = (roi_cell % grid_w) * roi_size;
    Rng rng(seed);
    for (std::uint32_t y = 0; y < height; ++y)
    {
        for (std::uint32_t x = 0; x < width; ++x)
        {
            const bool inside =
                    y >= oy && y < oy + roi_size && x >= ox && x < ox + roi_size;
            if (rng.uniform() < (inside ? object_density : noise_density))
            {
                f.events.push_back({y, x});
            }
        }
    }
    return f;
}

AttentionConfig default_attention_config(std::uint32_t height, std::uint32_t width,
        std::uint32_t downsample, std::uint32_t roi_size,
        std::vector<std::uint32_t> hidden, std::uint32_t classes, std::uint64_t seed)
{
    if (downsample == 0 || roi_size == 0 || height % downsample || width % downsample
            || height % roi_size || width % roi_size || roi_size % downsample)
    {
        throw ConfigError("attention: frame, pooling and RoI sizes must divide evenly");
    }
    AttentionConfig cfg;
    cfg.downsample = downsample;
    cfg.roi_size = roi_size;

    const std::uint32_t ph = height / downsample, pw = width / downsample;
    const std::uint32_t grid_w = width / roi_size;
    const std::uint32_t cells = (height / roi_size) * grid_w;
    const std::uint32_t per_cell = roi_size / downsample;
    NetworkSpec det = dense_network_spec("detector", ph * pw, {cells},
            SpikeMode::graded, QuantKind::bf16);
    std::vector<float> w(std::size_t{ph} * pw * cells, 0.0f);
    for (std::uint32_t py = 0; py < ph; ++py)
    {
        for (std::uint32_t px = 0; px < pw; ++px)
        {
            const std::uint32_t cell = (py / per_cell) * grid_w + px / per_cell;
            w[(std::size_t{py} * pw + px) * cells + cell] = 1.0f;
        }
    }
    cfg.detector = build_network(det, std::vector<std::vector<float>>{w});

    std::vector<std::uint32_t> outs = hidden;
    outs.push_back(classes);
    WeightGenerator gen;
    gen.seed = seed;
    NetworkSpec cls = dense_network_spec("classifier", roi_size * roi_size, outs,
            SpikeMode::graded, QuantKind::bf16);
    cls.input_mode = SpikeMode::binary;
    cfg.classifier = build_network(cls, gen);
    NetworkSpec base = dense_network_spec("baseline", height * width, outs,
            SpikeMode::graded, QuantKind::bf16);
    base.input_mode = SpikeMode::binary;
    cfg.baseline = build_network(base, gen);
    return cfg;
}

namespace {

struct StageRun
{
    StageCost cost;
    CostCounters counters;
    std::vector<Bf16> outputs;
};

StageRun run_network(const AttentionConfig &cfg, const Network &net,
        const Stimulus &stim, std::string name)
{
    const MeshTopology topo(cfg.mesh_width, cfg.mesh_height);
    const Mapping mapping = assign_layers(net.spec, topo, cfg.mapping, cfg.capacity_words);
    SimOptions opts;
    opts.variant = cfg.variant;
    opts.group = cfg.group;
    opts.table = cfg.table;
    const std::vector<Stimulus> steps{stim};
    const SimResult r = simulate(net, mapping, opts, steps);
    StageRun s;
    s.cost.name = std::move(name);
    s.cost.energy_uj = evaluate(r.totals, cfg.table).energy_uj;
    s.cost.latency_us = cycles_to_us(r.makespan, cfg.table);
    s.counters = r.totals;
    s.outputs = r.steps.front().outputs.back();
    return s;
}

StageRun scalar_stage(const AttentionConfig &cfg, const CostCounters &c,
        std::string name)
{
    StageRun s;
    s.cost.name = std::move(name);
    s.cost.energy_uj = evaluate(c, cfg.table).energy_uj;
    s.cost.latency_us = cycles_to_us(work_cycles(c, cfg.table), cfg.table);
    s.counters = c;
    return s;
}

void add_stage(PipelineReport &p, StageRun s)
{
    p.energy_uj += s.cost.energy_uj;
    p.latency_us += s.cost.latency_us;
    p.counters += s.counters;
    p.stages.push_back(s.cost);
    if (!s.outputs.empty())
    {
        p.outputs = std::move(s.outputs);
    }
}

void charge_scalar(CostCounters &c, std::uint64_t instr)
{
    c.account(OpClass::riscv_instr, instr);
    c.account(OpClass::imem_fetch, instr);
}

} // namespace

AttentionResult run_hard_attention(const AttentionConfig &cfg, const EventFrame &frame)
{
    const std::uint32_t H = frame.height, W = frame.width;
    const std::uint32_t ds = cfg.downsample, roi = cfg.roi_size;
    if (ds == 0 || H % ds || W % ds || roi == 0)
    {
        throw ConfigError("attention: frame size must be a multiple of the downsample factor");
    }
    const std::uint32_t ph = H / ds, pw = W / ds;
    const std::uint32_t grid_h = (H + roi - 1) / roi, grid_w = (W + roi - 1) / roi;
    if (cfg.detector.spec.input_dim != ph * pw)
    {
        throw ConfigError(fmt::format("attention: detector expects {} inputs, pooled "
                                      "frame has {}",
                cfg.detector.spec.input_dim, ph * pw));
    }
    if (cfg.detector.spec.layers.empty()
            || cfg.detector.spec.layers.back().output_size() != grid_h * grid_w)
    {
        throw ConfigError("attention: detector output must have one unit per RoI cell");
    }
    if (cfg.classifier.spec.input_dim != roi * roi)
    {
        throw ConfigError("attention: classifier input must be roi_size^2");
    }
    if (cfg.baseline.spec.input_dim != H * W)
    {
        throw ConfigError("attention: baseline input must be the full frame");
    }
    for (const FrameEvent &e : frame.events)
    {
        if (e.y >= H || e.x >= W)
        {
            throw ConfigError(fmt::format("attention: event ({}, {}) outside frame", e.y, e.x));
        }
    }

    AttentionResult res;

    // Average pooling on the scalar core.
    std::map<std::uint32_t, std::uint32_t> pooled;
    CostCounters pool;
    for (const FrameEvent &e : frame.events)
    {
        ++pooled[(e.y / ds) * pw + e.x / ds];
        charge_scalar(pool, cfg.pool_instr_per_event);
        pool.account(OpClass::dmem_read_word, 1);
        pool.account(OpClass::dmem_write_word, 1);
    }
    Stimulus det_in;
    const float inv = 1.0f / static_cast<float>(ds * ds);
    for (const auto &[cell, count] : pooled)
    {
        charge_scalar(pool, cfg.pool_instr_per_cell);
        pool.account(OpClass::dmem_read_word, 1);
        det_in.push_back({cell, cfg.detector.spec.input_mode == SpikeMode::graded
                                        ? std::optional(Bf16::from_float(count * inv))
                                        : std::nullopt});
    }
    add_stage(res.attention, scalar_stage(cfg, pool, "downsample"));

    StageRun det = run_network(cfg, cfg.detector, det_in, "detector");
    const std::vector<Bf16> scores = det.outputs;
    add_stage(res.attention, std::move(det));

    // Argmax over the detector's output spikes; ties go to the lowest index.
    CostCounters argmax;
    std::uint32_t best = 0;
    float best_v = 0.0f;
    bool any = false;
    for (std::uint32_t i = 0; i < scores.size(); ++i)
    {
        if (scores[i].is_zero())
        {
            continue;
        }
        charge_scalar(argmax, cfg.argmax_instr_per_output);
        if (!any || scores[i].to_float() > best_v)
        {
            best = i;
            best_v = scores[i].to_float();
            any = true;
        }
    }
    res.roi_cell = best;
    res.crop_y = std::min((best / grid_w) * roi, H > roi ? H - roi : 0);
    res.crop_x = std::min((best % grid_w) * roi, W > roi ? W - roi : 0);

    CostCounters crop = argmax;
    Stimulus cls_in;
    for (const FrameEvent &e : frame.events)
    {
        charge_scalar(crop, cfg.crop_instr_per_event);
        if (e.y >= res.crop_y && e.y < res.crop_y + roi && e.x >= res.crop_x
                && e.x < res.crop_x + roi)
        {
            cls_in.push_back({(e.y - res.crop_y) * roi + (e.x - res.crop_x), std::nullopt});
        }
    }
    std::sort(cls_in.begin(), cls_in.end(),
            [](const InputEvent &a, const InputEvent &b) { return a.index < b.index; });
    res.cropped_events = cls_in.size();
    add_stage(res.attention, scalar_stage(cfg, crop, "argmax+crop"));
    add_stage(res.attention, run_network(cfg, cfg.classifier, cls_in, "classifier"));

    Stimulus full;
    for (const FrameEvent &e : frame.events)
    {
        full.push_back({e.y * W + e.x, std::nullopt});
    }
    std::sort(full.begin(), full.end(),
            [](const InputEvent &a, const InputEvent &b) { return a.index < b.index; });
    add_stage(res.baseline, run_network(cfg, cfg.baseline, full, "baseline"));
    return res;
}

} // namespace nmsim

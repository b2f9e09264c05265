#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nmsim/core_model.hpp"
#include "nmsim/netmodel.hpp"

namespace nmsim {

struct PixelEvent
{
    std::uint32_t y = 0;
    std::uint32_t x = 0;
    std::uint32_t c = 0;
    std::optional<Bf16> value; // absent for binary spikes

    friend bool operator==(const PixelEvent &, const PixelEvent &) = default;
};

/// Raster index (y * w + x) * c + channel.
std::uint32_t raster_index(const PixelEvent &ev, std::uint32_t w,
        std::uint32_t c);
PixelEvent pixel_from_index(std::uint32_t index, std::uint32_t w,
        std::uint32_t c, std::optional<Bf16> value);

/// Event-driven depth-first execution of one conv layer. Input events must
/// arrive in strictly increasing raster order within a frame. Only received
/// events are buffered (one word per binary event, two per graded one, a row
/// never exceeding w * c_in words), plus a column of c_out partial sums.
/// An output pixel is computed as soon as no later event can fall into its
/// receptive field, and rows are released once no pending output needs them.
class LineBuffer
{
public:
    LineBuffer(const LayerSpec &spec, std::span<const Bf16> kernel,
            CoreVariant variant, ControlConstants k = {});

    /// Stores the event and returns the output events it completes, in
    /// raster order. Throws CausalityError naming the coordinates when the
    /// raster order is violated.
    std::vector<PixelEvent> push(const PixelEvent &ev);

    /// End of frame: computes every remaining output and empties the buffer.
    std::vector<PixelEvent> finish();

    /// Counters accumulated since the previous call.
    CostCounters take_cost();
    const CostCounters &total_cost() const { return total_; }
    /// Multiply-accumulates since the previous call.
    std::uint64_t take_synaptic_ops();

    std::uint64_t words() const { return words_; }
    std::uint64_t peak_words() const { return peak_words_; }
    /// Occupancy right after the last event was stored, before release.
    std::uint64_t last_high_water() const { return high_water_; }

    /// k * w * c_in + c_out.
    static std::uint64_t bound_words(const ConvShape &shape);

private:
    struct Entry
    {
        std::uint32_t x;
        std::uint32_t c;
        std::optional<Bf16> value;
    };

    std::uint64_t last_position(std::uint32_t oy, std::uint32_t ox) const;
    void compute_ready(std::uint64_t upto, std::vector<PixelEvent> &out);
    void compute_output(std::uint32_t oy, std::uint32_t ox,
            std::vector<PixelEvent> &out);
    void release_rows();
    void update_words();
    void charge(const CostCounters &c);

    const LayerSpec &spec_;
    ConvShape shape_;
    std::span<const Bf16> kernel_;
    CoreVariant variant_;
    ControlConstants k_;

    std::map<std::uint32_t, std::vector<Entry>> rows_;
    std::optional<std::uint64_t> cursor_;
    std::uint32_t next_oy_ = 0;
    std::uint32_t next_ox_ = 0;
    bool active_ = false;

    std::uint64_t words_ = 0;
    std::uint64_t peak_words_ = 0;
    std::uint64_t high_water_ = 0;
    CostCounters pending_;
    CostCounters total_;
    std::uint64_t pending_ops_ = 0;
};

} // namespace nmsim

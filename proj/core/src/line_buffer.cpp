#include "nmsim/line_buffer.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "nmsim/error.hpp"

namespace nmsim {

std::uint32_t raster_index(const PixelEvent &ev, std::uint32_t w,
        std::uint32_t c)
{
    return (ev.y * w + ev.x) * c + ev.c;
}

PixelEvent pixel_from_index(std::uint32_t index, std::uint32_t w,
        std::uint32_t c, std::optional<Bf16> value)
{
    const std::uint32_t pix = index / c;
    return PixelEvent{pix / w, pix % w, index % c, value};
}

LineBuffer::LineBuffer(const LayerSpec &spec, std::span<const Bf16> kernel,
        CoreVariant variant, ControlConstants k)
        : spec_(spec)
        , shape_(spec.conv())
        , kernel_(kernel)
        , variant_(variant)
        , k_(k)
{
    if (kernel.size() != spec.weight_count())
    {
        throw ConfigError(fmt::format("line buffer: kernel has {} values, "
                                      "expected {}",
                kernel.size(), spec.weight_count()));
    }
}

std::uint64_t LineBuffer::bound_words(const ConvShape &s)
{
    return std::uint64_t{s.k} * s.w * s.c_in + s.c_out;
}

std::uint64_t LineBuffer::last_position(std::uint32_t oy, std::uint32_t ox) const
{
    const std::uint64_t y = std::uint64_t{oy} * shape_.stride + shape_.k - 1;
    const std::uint64_t x = std::uint64_t{ox} * shape_.stride + shape_.k - 1;
    return (y * shape_.w + x) * shape_.c_in + shape_.c_in - 1;
}

void LineBuffer::charge(const CostCounters &c)
{
    pending_ += c;
    total_ += c;
}

std::vector<PixelEvent> LineBuffer::push(const PixelEvent &ev)
{
    if (ev.y >= shape_.h || ev.x >= shape_.w || ev.c >= shape_.c_in)
    {
        throw RoutingFault(fmt::format(
                "conv event (y={}, x={}, c={}) outside {}x{}x{} input", ev.y,
                ev.x, ev.c, shape_.h, shape_.w, shape_.c_in));
    }
    const std::uint64_t pos = raster_index(ev, shape_.w, shape_.c_in);
    if (cursor_ && pos <= *cursor_)
    {
        const PixelEvent prev = pixel_from_index(
                static_cast<std::uint32_t>(*cursor_), shape_.w, shape_.c_in,
                std::nullopt);
        throw CausalityError(fmt::format(
                "depth-first conv: event (y={}, x={}, c={}) arrived after "
                "(y={}, x={}, c={}); raster order required",
                ev.y, ev.x, ev.c, prev.y, prev.x, prev.c));
    }
    cursor_ = pos;
    active_ = true;

    rows_[ev.y].push_back(Entry{ev.x, ev.c, ev.value});
    CostCounters store;
    store.account(OpClass::riscv_instr, k_.line_buffer_store_instr);
    store.account(OpClass::imem_fetch, k_.line_buffer_store_instr);
    store.account(OpClass::dmem_write_word, ev.value ? 2 : 1);
    charge(store);
    update_words();
    high_water_ = words_;

    std::vector<PixelEvent> out;
    compute_ready(pos, out);
    release_rows();
    update_words();
    return out;
}

std::vector<PixelEvent> LineBuffer::finish()
{
    std::vector<PixelEvent> out;
    if (active_)
    {
        compute_ready(UINT64_MAX, out);
    }
    rows_.clear();
    cursor_.reset();
    next_oy_ = 0;
    next_ox_ = 0;
    active_ = false;
    words_ = 0;
    return out;
}

void LineBuffer::compute_ready(std::uint64_t upto, std::vector<PixelEvent> &out)
{
    const std::uint32_t oh = shape_.out_h(), ow = shape_.out_w();
    while (next_oy_ < oh && last_position(next_oy_, next_ox_) <= upto)
    {
        compute_output(next_oy_, next_ox_, out);
        if (++next_ox_ == ow)
        {
            next_ox_ = 0;
            ++next_oy_;
        }
    }
}

void LineBuffer::compute_output(std::uint32_t oy, std::uint32_t ox,
        std::vector<PixelEvent> &out)
{
    const std::uint32_t k = shape_.k, c_in = shape_.c_in, c_out = shape_.c_out;
    const std::uint32_t y0 = oy * shape_.stride, x0 = ox * shape_.stride;

    struct Tap
    {
        const Bf16 *w;
        std::optional<Bf16> value;
    };
    std::vector<Tap> taps;
    std::uint64_t input_words = 0;
    for (std::uint32_t ky = 0; ky < k; ++ky)
    {
        auto it = rows_.find(y0 + ky);
        if (it == rows_.end())
        {
            continue;
        }
        const auto &row = it->second;
        auto e = std::lower_bound(row.begin(), row.end(), x0,
                [](const Entry &en, std::uint32_t x) { return en.x < x; });
        for (; e != row.end() && e->x < x0 + k; ++e)
        {
            const std::uint32_t kx = e->x - x0;
            taps.push_back(Tap{kernel_.data()
                            + ((std::size_t{ky} * k + kx) * c_in + e->c) * c_out,
                    e->value});
            input_words += e->value ? 2 : 1;
        }
    }
    if (taps.empty())
    {
        return;
    }

    std::vector<Bf16> acc(c_out);
    for (std::uint32_t co = 0; co < c_out; ++co)
    {
        Bf16 s;
        for (const Tap &t : taps)
        {
            s = neuron_update(s, t.w[co], t.value);
        }
        acc[co] = s;
    }
    for (std::uint32_t co = 0; co < c_out; ++co)
    {
        const FireResult f = threshold_fire(acc[co], spec_);
        if (f.fired)
        {
            out.push_back(PixelEvent{oy, ox, co, f.value});
        }
    }

    std::uint64_t graded = 0;
    for (const Tap &t : taps)
    {
        graded += t.value ? 1 : 0;
    }
    const std::uint64_t nnz = taps.size();
    pending_ops_ += nnz * c_out;
    CostCounters c = event_control_cost(variant_, c_out, nnz, k_);
    c += threshold_control_cost(variant_, c_out, k_);
    c.account(OpClass::dmem_read_word,
            nnz * weight_words(spec_.weight_scheme, c_out) + input_words + c_out);
    c.account(OpClass::dmem_write_word, c_out);
    if (variant_.has_npes())
    {
        c.account(OpClass::npe_op, std::uint64_t{c_out} * (nnz + graded) + c_out);
    }
    charge(c);
}

void LineBuffer::release_rows()
{
    const std::uint32_t keep_from = next_oy_ * shape_.stride;
    while (!rows_.empty() && rows_.begin()->first < keep_from)
    {
        rows_.erase(rows_.begin());
    }
}

void LineBuffer::update_words()
{
    std::uint64_t w = 0;
    const std::uint64_t row_cap = std::uint64_t{shape_.w} * shape_.c_in;
    for (const auto &[y, row] : rows_)
    {
        std::uint64_t words = 0;
        for (const Entry &e : row)
        {
            words += e.value ? 2 : 1;
        }
        w += std::min(words, row_cap);
    }
    if (active_)
    {
        w += shape_.c_out;
    }
    words_ = w;
    peak_words_ = std::max(peak_words_, words_);
}

std::uint64_t LineBuffer::take_synaptic_ops()
{
    return std::exchange(pending_ops_, 0);
}

CostCounters LineBuffer::take_cost()
{
    CostCounters c = pending_;
    pending_ = {};
    return c;
}

} // namespace nmsim

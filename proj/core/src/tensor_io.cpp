#include "nmsim/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nmsim/bf16.hpp"
#include "nmsim/error.hpp"

namespace nmsim {

namespace {

constexpr char kMagic[4] = {'N', 'M', 'T', '1'};
constexpr std::size_t kHeader = 16;

void put_u16(std::string &out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
    {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

std::uint16_t get_u16(const unsigned char *p)
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char *p)
{
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8)
            | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

} // namespace

std::uint64_t Tensor::element_count() const
{
    std::uint64_t n = 1;
    for (std::uint32_t d : dims)
    {
        n *= d;
    }
    return n;
}

std::string encode_tensor(const Tensor &t)
{
    if (t.dims.empty() || t.dims.size() > 4)
    {
        throw ConfigError(fmt::format("tensor rank must be 1..4, got {}",
                t.dims.size()));
    }
    for (std::uint32_t d : t.dims)
    {
        if (d == 0 || d > 0xffff)
        {
            throw ConfigError(fmt::format("tensor dim {} out of range", d));
        }
    }
    if (t.values.size() != t.element_count())
    {
        throw ConfigError("tensor value count does not match its dims");
    }
    std::string out(kMagic, 4);
    out.push_back(static_cast<char>(t.dtype));
    out.push_back(static_cast<char>(t.dims.size()));
    put_u16(out, 0);
    for (std::size_t i = 0; i < 4; ++i)
    {
        put_u16(out, i < t.dims.size() ? static_cast<std::uint16_t>(t.dims[i]) : 0);
    }
    for (float v : t.values)
    {
        if (t.dtype == TensorDtype::f32)
        {
            put_u32(out, std::bit_cast<std::uint32_t>(v));
        }
        else
        {
            const Bf16 b = Bf16::from_float(v);
            if (b.to_float() != v && v == v)
            {
                throw ConfigError(fmt::format(
                        "value {} is not representable in bf16", v));
            }
            put_u16(out, b.bits());
        }
    }
    return out;
}

Tensor decode_tensor(std::string_view bytes)
{
    if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 4) != 0)
    {
        throw ConfigError("not a tensor file (bad magic)");
    }
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
    Tensor t;
    if (p[4] != static_cast<unsigned char>(TensorDtype::f32)
            && p[4] != static_cast<unsigned char>(TensorDtype::bf16))
    {
        throw ConfigError(fmt::format("unknown tensor dtype code {}", p[4]));
    }
    t.dtype = static_cast<TensorDtype>(p[4]);
    const unsigned rank = p[5];
    if (rank == 0 || rank > 4)
    {
        throw ConfigError(fmt::format("tensor rank must be 1..4, got {}", rank));
    }
    for (unsigned i = 0; i < rank; ++i)
    {
        t.dims.push_back(get_u16(p + 8 + 2 * i));
    }
    const std::size_t width = t.dtype == TensorDtype::f32 ? 4 : 2;
    const std::uint64_t n = t.element_count();
    if (bytes.size() != kHeader + n * width)
    {
        throw ConfigError(fmt::format(
                "tensor file size {} does not match {} elements", bytes.size(), n));
    }
    t.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i)
    {
        const unsigned char *q = p + kHeader + i * width;
        t.values[i] = t.dtype == TensorDtype::f32
                ? std::bit_cast<float>(get_u32(q))
                : Bf16::from_bits(get_u16(q)).to_float();
    }
    return t;
}

Tensor load_tensor(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError(fmt::format("cannot read tensor file '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return decode_tensor(ss.str());
}

void save_tensor(const Tensor &t, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ConfigError(fmt::format("cannot write tensor file '{}'", path));
    }
    out << encode_tensor(t);
}

} // namespace nmsim

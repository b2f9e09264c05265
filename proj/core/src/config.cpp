#include "nmsim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "nmsim/error.hpp"
#include "nmsim/tensor_io.hpp"

namespace nmsim {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path &path, std::string_view what)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError(fmt::format("cannot read {} '{}'", what, path.string()));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_keys(const YAML::Node &node, std::initializer_list<std::string_view> allowed,
        std::string_view where)
{
    if (!node.IsMap())
    {
        throw ConfigError(fmt::format("{}: expected a mapping", where));
    }
    for (const auto &kv : node)
    {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (std::string_view a : allowed)
        {
            ok = ok || a == key;
        }
        if (!ok)
        {
            throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
}

template <typename T>
T get(const YAML::Node &node, std::string_view key, std::string_view where)
{
    try
    {
        return node[std::string(key)].as<T>();
    }
    catch (const YAML::Exception &)
    {
        throw ConfigError(fmt::format("{}: bad value for '{}'", where, key));
    }
}

template <typename T>
T get_or(const YAML::Node &node, std::string_view key, T fallback,
        std::string_view where)
{
    if (!node[std::string(key)])
    {
        return fallback;
    }
    return get<T>(node, key, where);
}

std::uint32_t get_positive(const YAML::Node &node, std::string_view key,
        std::string_view where)
{
    const auto v = get<long long>(node, key, where);
    if (v <= 0 || v > 0xffffffffLL)
    {
        throw ConfigError(fmt::format("{}: '{}' must be a positive integer", where, key));
    }
    return static_cast<std::uint32_t>(v);
}

std::string fmt_double(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt_float(float v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"' || c == '\\')
        {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

YAML::Node parse_yaml(std::string_view text, std::string_view what)
{
    try
    {
        return YAML::Load(std::string(text));
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError(fmt::format("{}: {}", what, e.what()));
    }
}

// Inline form: clock_mhz plus an energy and a cycles map naming every class.
CostTable cost_table_from_node(const YAML::Node &node)
{
    const std::string where = "cost_table";
    check_keys(node, {"clock_mhz", "energy", "cycles"}, where);
    CostTable t;
    t.clock_mhz = get<double>(node, "clock_mhz", where);
    for (const char *part : {"energy", "cycles"})
    {
        const YAML::Node m = node[part];
        if (!m || !m.IsMap() || m.size() != kOpClassCount)
        {
            throw ConfigError(fmt::format("cost_table: '{}' must map all {} op classes",
                    part, kOpClassCount));
        }
        for (const auto &kv : m)
        {
            const OpClass op = parse_op_class(kv.first.as<std::string>());
            const double v = get<double>(m, kv.first.as<std::string>(), where);
            (std::string_view(part) == "energy" ? t.energy(op) : t.cycle(op)) = v;
        }
    }
    t.validate();
    return t;
}

NetworkDescription network_from_node(const YAML::Node &root, const fs::path &base)
{
    const std::string where = "network config";
    check_keys(root,
            {"name", "input_dim", "input_shape", "input_mode", "spike_mode",
                    "weight_scheme", "threshold", "conv_style", "weights", "layers"},
            where);
    NetworkDescription d;
    NetworkSpec &spec = d.spec;
    spec.name = get_or<std::string>(root, "name", "network", where);

    const SpikeMode mode = parse_spike_mode(
            get_or<std::string>(root, "spike_mode", "graded", where));
    const QuantKind scheme = parse_quant_kind(
            get_or<std::string>(root, "weight_scheme", "bf16", where));
    const float threshold = get_or<float>(root, "threshold", 1.0f, where);
    const ExecutionStyle style = parse_execution_style(
            get_or<std::string>(root, "conv_style", "stateful", where));
    spec.input_mode = parse_spike_mode(get_or<std::string>(
            root, "input_mode", std::string(to_string(mode)), where));

    ConvShape shape; // h, w, c of the current activation map
    bool have_shape = false;
    if (root["input_shape"])
    {
        const auto dims = get<std::vector<std::uint32_t>>(root, "input_shape", where);
        if (dims.size() != 3 || dims[0] == 0 || dims[1] == 0 || dims[2] == 0)
        {
            throw ConfigError("network config: input_shape must be [h, w, c]");
        }
        shape = ConvShape{dims[0], dims[1], dims[2], 0, 1, 1};
        have_shape = true;
        spec.input_dim = dims[0] * dims[1] * dims[2];
    }
    if (root["input_dim"])
    {
        const std::uint32_t dim = get_positive(root, "input_dim", where);
        if (have_shape && dim != spec.input_dim)
        {
            throw ConfigError("network config: input_dim disagrees with input_shape");
        }
        spec.input_dim = dim;
    }
    if (spec.input_dim == 0)
    {
        throw ConfigError("network config: input_dim or input_shape required");
    }

    if (const auto w = root["weights"])
    {
        check_keys(w, {"seed", "gain", "bias", "files"}, "network weights");
        d.generator.seed = get_or<std::uint64_t>(w, "seed", d.generator.seed, where);
        d.generator.gain = get_or<double>(w, "gain", d.generator.gain, where);
        d.generator.bias = get_or<double>(w, "bias", d.generator.bias, where);
        if (w["files"])
        {
            for (const auto &f : get<std::vector<std::string>>(w, "files", where))
            {
                d.weight_files.push_back(resolve_config_path(f, base).string());
            }
        }
    }

    const YAML::Node layers = root["layers"];
    if (!layers || !layers.IsSequence())
    {
        throw ConfigError("network config: 'layers' must be a list");
    }
    std::uint32_t size = spec.input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        const YAML::Node l = layers[i];
        const std::string lw = fmt::format("layer {}", i);
        check_keys(l,
                {"type", "n_out", "h", "w", "c_in", "c_out", "k", "stride",
                        "spike_mode", "weight_scheme", "threshold", "style"},
                lw);
        LayerSpec layer;
        layer.spike_mode = parse_spike_mode(get_or<std::string>(
                l, "spike_mode", std::string(to_string(mode)), lw));
        layer.weight_scheme = parse_quant_kind(get_or<std::string>(
                l, "weight_scheme", std::string(to_string(scheme)), lw));
        layer.threshold = get_or<float>(l, "threshold", threshold, lw);
        const auto type = get<std::string>(l, "type", lw);
        if (type == "dense")
        {
            layer.shape = DenseShape{size, get_positive(l, "n_out", lw)};
            have_shape = false;
        }
        else if (type == "conv")
        {
            ConvShape c;
            if (l["h"] || l["w"] || l["c_in"])
            {
                c.h = get_positive(l, "h", lw);
                c.w = get_positive(l, "w", lw);
                c.c_in = get_positive(l, "c_in", lw);
            }
            else if (have_shape)
            {
                c.h = shape.h;
                c.w = shape.w;
                c.c_in = shape.c_in;
            }
            else
            {
                throw ConfigError(fmt::format(
                        "{}: conv input shape unknown; give h, w, c_in", lw));
            }
            c.c_out = get_positive(l, "c_out", lw);
            c.k = get_positive(l, "k", lw);
            c.stride = get_or<std::uint32_t>(l, "stride", 1, lw);
            layer.shape = c;
            layer.style = parse_execution_style(get_or<std::string>(
                    l, "style", std::string(to_string(style)), lw));
            layer.validate();
            shape = ConvShape{c.out_h(), c.out_w(), c.c_out, 0, 1, 1};
            have_shape = true;
        }
        else
        {
            throw ConfigError(fmt::format("{}: unknown type '{}'", lw, type));
        }
        spec.layers.push_back(layer);
        size = layer.output_size();
    }
    spec.validate();
    if (!d.weight_files.empty() && d.weight_files.size() != spec.layers.size())
    {
        throw ConfigError(fmt::format(
                "network config: {} weight files for {} layers",
                d.weight_files.size(), spec.layers.size()));
    }
    return d;
}

} // namespace

fs::path resolve_config_path(const std::string &path, const fs::path &base_dir)
{
    const fs::path p(path);
    if (p.is_absolute())
    {
        return p;
    }
    const fs::path local = base_dir / p;
    if (fs::exists(local))
    {
        return fs::absolute(local).lexically_normal();
    }
    if (const char *dir = std::getenv(kConfigDirEnv); dir && *dir)
    {
        const fs::path env = fs::path(dir) / p;
        if (fs::exists(env))
        {
            return fs::absolute(env).lexically_normal();
        }
    }
    return fs::absolute(local).lexically_normal();
}

Network NetworkDescription::materialize() const
{
    if (weight_files.empty())
    {
        return build_network(spec, generator);
    }
    std::vector<std::vector<float>> raw;
    for (std::size_t i = 0; i < weight_files.size(); ++i)
    {
        Tensor t = load_tensor(weight_files[i]);
        if (t.element_count() != spec.layers.at(i).weight_count())
        {
            throw ConfigError(fmt::format(
                    "weight file '{}' has {} values, layer {} needs {}",
                    weight_files[i], t.element_count(), i,
                    spec.layers[i].weight_count()));
        }
        raw.push_back(std::move(t.values));
    }
    return build_network(spec, raw);
}

NetworkSpec apply_overrides(NetworkSpec spec, std::optional<SpikeMode> mode,
        std::optional<QuantKind> scheme, std::optional<ExecutionStyle> style)
{
    if (mode)
    {
        spec.input_mode = *mode;
    }
    for (LayerSpec &l : spec.layers)
    {
        if (mode)
        {
            l.spike_mode = *mode;
        }
        if (scheme)
        {
            l.weight_scheme = *scheme;
        }
        if (style && l.is_conv())
        {
            l.style = *style;
        }
    }
    spec.validate();
    return spec;
}

void BenchmarkConfig::validate() const
{
    if (mesh_width == 0 || mesh_height == 0)
    {
        throw ConfigError("mesh dimensions must be positive");
    }
    if (group == 0)
    {
        throw ConfigError("group size must be at least 1");
    }
    if (repetitions == 0)
    {
        throw ConfigError("repetitions must be at least 1");
    }
    if (stimulus.kind == StimulusConfig::Kind::generated
            && !(stimulus.density > 0.0 && stimulus.density <= 1.0))
    {
        throw ConfigError(fmt::format(
                "stimulus density must be in (0, 1], got {}", stimulus.density));
    }
    cost_table.validate();
    network.spec.validate();
}

NetworkSpec BenchmarkConfig::effective_spec() const
{
    return apply_overrides(network.spec, spike_mode, weight_scheme, conv_style);
}

Network BenchmarkConfig::effective_network() const
{
    NetworkDescription d = network;
    d.spec = effective_spec();
    return d.materialize();
}

NetworkDescription default_network()
{
    NetworkDescription d;
    d.spec = dense_network_spec("default", 256, {256, 256, 256, 10},
            SpikeMode::graded, QuantKind::bf16, 0.03125f);
    return d;
}

BenchmarkConfig default_benchmark_config()
{
    BenchmarkConfig cfg;
    cfg.network = default_network();
    return cfg;
}

NetworkDescription parse_network_config(std::string_view yaml, const fs::path &base_dir)
{
    return network_from_node(parse_yaml(yaml, "network config"), base_dir);
}

NetworkDescription load_network_config(const fs::path &path)
{
    return parse_network_config(read_text(path, "network config"),
            fs::absolute(path).parent_path());
}

BenchmarkConfig parse_benchmark_config(std::string_view yaml, const fs::path &base)
{
    const YAML::Node root = parse_yaml(yaml, "benchmark config");
    const std::string where = "benchmark config";
    check_keys(root,
            {"name", "network", "mapping", "mesh", "variant", "group",
                    "spike_mode", "weight_scheme", "conv_style", "cost_table",
                    "capacity_words", "repetitions", "stimulus"},
            where);
    BenchmarkConfig cfg;
    cfg.name = get_or<std::string>(root, "name", cfg.name, where);
    if (!root["network"])
    {
        cfg.network = default_network();
    }
    else if (root["network"].IsScalar())
    {
        const fs::path p = resolve_config_path(get<std::string>(root, "network", where), base);
        cfg.network = parse_network_config(read_text(p, "network config"), p.parent_path());
    }
    else
    {
        cfg.network = network_from_node(root["network"], base);
    }
    if (root["mapping"])
    {
        cfg.mapping = parse_mapping_policy(get<std::string>(root, "mapping", where));
    }
    if (root["mesh"])
    {
        const auto mesh = get<std::vector<std::uint32_t>>(root, "mesh", where);
        if (mesh.size() != 2)
        {
            throw ConfigError("benchmark config: mesh must be [width, height]");
        }
        cfg.mesh_width = mesh[0];
        cfg.mesh_height = mesh[1];
    }
    if (root["variant"])
    {
        cfg.variant = parse_variant(get<std::string>(root, "variant", where));
    }
    cfg.group = get_or<std::uint32_t>(root, "group", cfg.group, where);
    if (root["spike_mode"])
    {
        cfg.spike_mode = parse_spike_mode(get<std::string>(root, "spike_mode", where));
    }
    if (root["weight_scheme"])
    {
        cfg.weight_scheme = parse_quant_kind(get<std::string>(root, "weight_scheme", where));
    }
    if (root["conv_style"])
    {
        cfg.conv_style = parse_execution_style(get<std::string>(root, "conv_style", where));
    }
    if (root["cost_table"] && root["cost_table"].IsMap())
    {
        cfg.cost_table = cost_table_from_node(root["cost_table"]);
    }
    else if (root["cost_table"])
    {
        cfg.cost_table_path =
                resolve_config_path(get<std::string>(root, "cost_table", where), base)
                        .string();
        cfg.cost_table = load_cost_table(cfg.cost_table_path);
    }
    cfg.capacity_words = get_or<std::uint64_t>(root, "capacity_words", cfg.capacity_words, where);
    cfg.repetitions = get_or<std::uint32_t>(root, "repetitions", cfg.repetitions, where);
    if (const auto s = root["stimulus"])
    {
        check_keys(s, {"kind", "seed", "density", "path"}, "stimulus");
        const auto kind = get_or<std::string>(s, "kind", "generated", "stimulus");
        if (kind == "generated")
        {
            cfg.stimulus.kind = StimulusConfig::Kind::generated;
        }
        else if (kind == "file")
        {
            cfg.stimulus.kind = StimulusConfig::Kind::file;
            cfg.stimulus.path = resolve_config_path(get<std::string>(s, "path", "stimulus"), base)
                                        .string();
        }
        else if (kind == "none")
        {
            cfg.stimulus.kind = StimulusConfig::Kind::none;
        }
        else
        {
            throw ConfigError(fmt::format("stimulus: unknown kind '{}'", kind));
        }
        cfg.stimulus.seed = get_or<std::uint64_t>(s, "seed", cfg.stimulus.seed, "stimulus");
        cfg.stimulus.density = get_or<double>(s, "density", cfg.stimulus.density, "stimulus");
    }
    cfg.validate();
    return cfg;
}

BenchmarkConfig load_benchmark_config(const fs::path &path)
{
    return parse_benchmark_config(read_text(path, "benchmark config"),
            fs::absolute(path).parent_path());
}

namespace {

void dump_network_body(std::string &out, const NetworkDescription &d,
        std::string_view indent)
{
    const NetworkSpec &s = d.spec;
    out += fmt::format("{}name: {}\n", indent, quote(s.name));
    out += fmt::format("{}input_dim: {}\n", indent, s.input_dim);
    out += fmt::format("{}input_mode: {}\n", indent, to_string(s.input_mode));
    out += fmt::format("{}weights:\n", indent);
    out += fmt::format("{}  seed: {}\n", indent, d.generator.seed);
    out += fmt::format("{}  gain: {}\n", indent, fmt_double(d.generator.gain));
    out += fmt::format("{}  bias: {}\n", indent, fmt_double(d.generator.bias));
    if (!d.weight_files.empty())
    {
        out += fmt::format("{}  files:\n", indent);
        for (const auto &f : d.weight_files)
        {
            out += fmt::format("{}    - {}\n", indent, quote(f));
        }
    }
    out += fmt::format("{}layers:\n", indent);
    for (const LayerSpec &l : s.layers)
    {
        if (l.is_conv())
        {
            const ConvShape &c = l.conv();
            out += fmt::format("{}  - type: conv\n", indent);
            out += fmt::format("{}    h: {}\n{}    w: {}\n{}    c_in: {}\n", indent,
                    c.h, indent, c.w, indent, c.c_in);
            out += fmt::format("{}    c_out: {}\n{}    k: {}\n{}    stride: {}\n",
                    indent, c.c_out, indent, c.k, indent, c.stride);
            out += fmt::format("{}    style: {}\n", indent, to_string(l.style));
        }
        else
        {
            out += fmt::format("{}  - type: dense\n", indent);
            out += fmt::format("{}    n_out: {}\n", indent, l.dense().n_out);
        }
        out += fmt::format("{}    spike_mode: {}\n", indent, to_string(l.spike_mode));
        out += fmt::format("{}    weight_scheme: {}\n", indent, to_string(l.weight_scheme));
        out += fmt::format("{}    threshold: {}\n", indent, fmt_float(l.threshold));
    }
}

} // namespace

std::string dump_network_config(const NetworkDescription &net)
{
    std::string out;
    dump_network_body(out, net, "");
    return out;
}

std::string dump_benchmark_config(const BenchmarkConfig &cfg)
{
    std::string out;
    out += fmt::format("name: {}\n", quote(cfg.name));
    out += "network:\n";
    dump_network_body(out, cfg.network, "  ");
    out += fmt::format("mapping: {}\n", to_string(cfg.mapping));
    out += fmt::format("mesh: [{}, {}]\n", cfg.mesh_width, cfg.mesh_height);
    out += fmt::format("variant: {}\n", to_string(cfg.variant));
    out += fmt::format("group: {}\n", cfg.group);
    if (cfg.spike_mode)
    {
        out += fmt::format("spike_mode: {}\n", to_string(*cfg.spike_mode));
    }
    if (cfg.weight_scheme)
    {
        out += fmt::format("weight_scheme: {}\n", to_string(*cfg.weight_scheme));
    }
    if (cfg.conv_style)
    {
        out += fmt::format("conv_style: {}\n", to_string(*cfg.conv_style));
    }
    if (!cfg.cost_table_path.empty())
    {
        out += fmt::format("cost_table: {}\n", quote(cfg.cost_table_path));
    }
    else if (!(cfg.cost_table == CostTable::defaults()))
    {
        const CostTable &t = cfg.cost_table;
        out += "cost_table:\n";
        out += fmt::format("  clock_mhz: {}\n", fmt_double(t.clock_mhz));
        out += "  energy:\n";
        for (OpClass op : kAllOpClasses)
        {
            out += fmt::format("    {}: {}\n", to_string(op), fmt_double(t.energy(op)));
        }
        out += "  cycles:\n";
        for (OpClass op : kAllOpClasses)
        {
            out += fmt::format("    {}: {}\n", to_string(op), fmt_double(t.cycle(op)));
        }
    }
    out += fmt::format("capacity_words: {}\n", cfg.capacity_words);
    out += fmt::format("repetitions: {}\n", cfg.repetitions);
    out += "stimulus:\n";
    switch (cfg.stimulus.kind)
    {
    case StimulusConfig::Kind::generated:
        out += "  kind: generated\n";
        break;
    case StimulusConfig::Kind::file:
        out += "  kind: file\n";
        out += fmt::format("  path: {}\n", quote(cfg.stimulus.path));
        break;
    case StimulusConfig::Kind::none:
        out += "  kind: none\n";
        break;
    }
    out += fmt::format("  seed: {}\n", cfg.stimulus.seed);
    out += fmt::format("  density: {}\n", fmt_double(cfg.stimulus.density));
    return out;
}

} // namespace nmsim

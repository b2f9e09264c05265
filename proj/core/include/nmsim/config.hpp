#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmsim/cost_model.hpp"
#include "nmsim/mapping.hpp"
#include "nmsim/netmodel.hpp"

namespace nmsim {

/// Environment variable naming the directory searched for relative config
/// paths that do not exist relative to the working directory.
inline constexpr const char *kConfigDirEnv = "NMSIM_CONFIG_DIR";

struct NetworkDescription
{
    NetworkSpec spec;
    WeightGenerator generator;
    /// One tensor file per layer; empty means generated weights.
    std::vector<std::string> weight_files;

    Network materialize() const;

    friend bool operator==(const NetworkDescription &,
            const NetworkDescription &) = default;
};

struct StimulusConfig
{
    enum class Kind : std::uint8_t { generated, file, none };

    Kind kind = Kind::generated;
    std::uint64_t seed = 1;
    /// Fraction of input neurons active per step, in (0, 1].
    double density = 0.1;
    std::string path;

    friend bool operator==(const StimulusConfig &, const StimulusConfig &) = default;
};

struct BenchmarkConfig
{
    std::string name = "default";
    NetworkDescription network;
    MappingPolicy mapping = MappingPolicy::one_layer_per_core;
    std::uint32_t mesh_width = 2;
    std::uint32_t mesh_height = 2;
    VariantTag variant = VariantTag::v3;
    std::uint32_t group = 1;
    std::optional<SpikeMode> spike_mode;
    std::optional<QuantKind> weight_scheme;
    std::optional<ExecutionStyle> conv_style;
    /// Empty when the built-in defaults are used.
    std::string cost_table_path;
    CostTable cost_table = CostTable::defaults();
    std::uint64_t capacity_words = kDefaultCapacityWords;
    StimulusConfig stimulus;
    std::uint32_t repetitions = 1;

    /// Throws ConfigError.
    void validate() const;
    /// Network spec with the spike-mode / weight / conv overrides applied.
    NetworkSpec effective_spec() const;
    Network effective_network() const;

    friend bool operator==(const BenchmarkConfig &, const BenchmarkConfig &) = default;
};

/// Applies overrides to every layer (and the input mode for spike mode).
NetworkSpec apply_overrides(NetworkSpec spec, std::optional<SpikeMode> mode,
        std::optional<QuantKind> scheme, std::optional<ExecutionStyle> style);

/// Four dense layers 256-256-256-10 on 256 inputs, graded, bf16 weights,
/// one layer per core on a 2x2 mesh, 10% input density.
BenchmarkConfig default_benchmark_config();
NetworkDescription default_network();

/// Relative paths resolve against base_dir, then the config directory
/// named by NMSIM_CONFIG_DIR. Throws ConfigError.
NetworkDescription parse_network_config(std::string_view yaml,
        const std::filesystem::path &base_dir);
NetworkDescription load_network_config(const std::filesystem::path &path);

BenchmarkConfig parse_benchmark_config(std::string_view yaml,
        const std::filesystem::path &base_dir);
BenchmarkConfig load_benchmark_config(const std::filesystem::path &path);

/// YAML with the network inline and absolute paths, so that parsing the
/// dump yields an equal config.
std::string dump_network_config(const NetworkDescription &net);
std::string dump_benchmark_config(const BenchmarkConfig &cfg);

std::filesystem::path resolve_config_path(const std::string &path,
        const std::filesystem::path &base_dir);

} // namespace nmsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apa/controller.hpp"
#include "apa/gan.hpp"
#include "apa/toy_data.hpp"

namespace apa {

struct DatasetConfig {
    DatasetSpec spec;
    std::size_t pool_size = 128;
    std::uint64_t pool_seed = 1;
};

struct EvalConfig {
    std::size_t samples = 10'000;        // generated and reference samples per evaluation
    double capture_radius_stds = 3.0;    // mode coverage radius in units of mode_std
    std::size_t hit_threshold = 10;
    std::size_t hist_bins = 64;
    std::int64_t final_window = 1'000;   // steps averaged for end-of-training sign statistics
};

/// Full declarative description of an experiment. JSON keys mirror the field
/// names; unknown keys are rejected at every level.
struct ExperimentConfig {
    std::string name = "experiment";
    DatasetConfig dataset;
    GanConfig gan;
    std::optional<ControllerConfig> apa;
    std::int64_t eval_every = 1'000;
    EvalConfig eval;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "runs";

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace apa

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apa/config.hpp"

namespace apa {

/// Column order of metrics.csv.
const std::vector<std::string>& metric_columns();

/// One metrics.csv row. Evaluation fields are set only on evaluation steps.
struct MetricRecord {
    std::int64_t step = 0;
    double mean_real_logit = 0.0;
    double mean_fake_logit = 0.0;
    double mean_sign_real = 0.0;
    double mean_sign_fake = 0.0;
    double lambda = 0.0;
    double p = 0.0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    std::optional<double> frechet;
    std::optional<double> histogram_jsd;
    std::optional<std::size_t> modes_hit;
};

/// %.17g, so every double round-trips.
std::string format_double(double v);
std::string csv_row(const MetricRecord& r);

struct RunSummary {
    std::string run_id;
    std::string config_name;
    std::uint64_t seed = 0;
    std::int64_t steps_completed = 0;
    bool ok = true;
    std::optional<std::int64_t> failed_step;
    std::string error;
    double max_p = 0.0;
    double final_p = 0.0;
    double final_sign_gap = 0.0;  // mean of (sign_real - sign_fake) over the final window
    double final_mean_sign_real = 0.0;
    double final_mean_sign_fake = 0.0;
    std::optional<double> final_frechet;
    std::optional<double> best_frechet;
    std::optional<std::int64_t> best_frechet_step;
    std::optional<double> final_histogram_jsd;
    std::optional<std::size_t> final_modes_hit;
    std::string started_at;

    nlohmann::json to_json() const;
};

/// `<config-name>-seed<k>`
std::string run_id(const ExperimentConfig& config, std::uint64_t seed);

struct RunOptions {
    std::size_t parallel = 1;
    std::ostream* progress = nullptr;
};

/// Trains one seed and writes metrics.csv, config.resolved.json,
/// summary.json (and p_history.csv with APA) under <output_dir>/<run_id>/.
/// A non-finite loss ends the run early with ok = false.
RunSummary run_single(const ExperimentConfig& config, std::uint64_t seed, std::ostream* progress = nullptr);

struct ExperimentResult {
    std::vector<RunSummary> runs;
    bool ok() const;
};

/// Every seed of the config, optionally on several threads. Results are in
/// seed order regardless of scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace apa

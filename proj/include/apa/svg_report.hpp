#pragma once

// Line-chart rendering of metrics.csv files as standalone SVG.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace apa {

enum class Panel { Logits, Signs, Frechet, P };

std::string to_string(Panel panel);
Panel panel_from_string(const std::string& name);

/// Parsed metrics.csv. Empty cells are nullopt.
struct MetricsTable {
    std::string label;
    std::vector<std::string> columns;
    std::map<std::string, std::vector<std::optional<double>>> values;

    std::size_t rows() const;
    const std::vector<std::optional<double>>& column(const std::string& name) const;
};

/// Throws std::runtime_error naming the file and the first missing column.
MetricsTable read_metrics_csv(const std::filesystem::path& path, const std::string& label);

/// `runs` may be run directories or metrics.csv paths. Labels are the run
/// directory names.
std::vector<MetricsTable> load_runs(const std::vector<std::filesystem::path>& runs);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Bucket means down to at most `max_points` points. Shorter input is
/// returned unchanged.
Series downsample(const Series& s, std::size_t max_points);

/// One subplot per panel, laid out left to right, one series per run and
/// quantity. Output depends only on the inputs.
std::string render_svg(const std::vector<MetricsTable>& runs, const std::vector<Panel>& panels,
                       std::size_t max_points = 400);

void write_report(const std::vector<std::filesystem::path>& runs, const std::vector<Panel>& panels,
                  const std::filesystem::path& out);

}  // namespace apa

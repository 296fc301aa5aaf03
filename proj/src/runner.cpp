#include "apa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "apa/errors.hpp"
#include "apa/gan.hpp"
#include "apa/metrics.hpp"

namespace apa {

using nlohmann::json;

const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> columns{
        "step",   "mean_real_logit", "mean_fake_logit", "mean_sign_real", "mean_sign_fake",   "lambda",
        "p",      "d_loss",          "g_loss",          "frechet",        "histogram_jsd", "modes_hit",
    };
    return columns;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_row(const MetricRecord& r) {
    std::string s = std::to_string(r.step);
    for (double v : {r.mean_real_logit, r.mean_fake_logit, r.mean_sign_real, r.mean_sign_fake, r.lambda, r.p,
                     r.d_loss, r.g_loss}) {
        s += ',';
        s += format_double(v);
    }
    s += ',';
    if (r.frechet) s += format_double(*r.frechet);
    s += ',';
    if (r.histogram_jsd) s += format_double(*r.histogram_jsd);
    s += ',';
    if (r.modes_hit) s += std::to_string(*r.modes_hit);
    return s;
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

}  // namespace

json RunSummary::to_json() const {
    json j;
    j["run_id"] = run_id;
    j["config_name"] = config_name;
    j["seed"] = seed;
    j["status"] = ok ? "ok" : "failed";
    j["steps_completed"] = steps_completed;
    j["failed_step"] = optional_json(failed_step);
    j["error"] = error;
    j["max_p"] = max_p;
    j["final_p"] = final_p;
    j["final_sign_gap"] = final_sign_gap;
    j["final_mean_sign_real"] = final_mean_sign_real;
    j["final_mean_sign_fake"] = final_mean_sign_fake;
    j["final_frechet"] = optional_json(final_frechet);
    j["best_frechet"] = optional_json(best_frechet);
    j["best_frechet_step"] = optional_json(best_frechet_step);
    j["final_histogram_jsd"] = optional_json(final_histogram_jsd);
    j["final_modes_hit"] = optional_json(final_modes_hit);
    j["started_at"] = started_at;
    return j;
}

std::string run_id(const ExperimentConfig& config, std::uint64_t seed) {
    return config.name + "-seed" + std::to_string(seed);
}

RunSummary run_single(const ExperimentConfig& config, std::uint64_t seed, std::ostream* progress) {
    config.validate();
    RunSummary summary;
    summary.run_id = run_id(config, seed);
    summary.config_name = config.name;
    summary.seed = seed;
    summary.started_at = utc_timestamp();

    const std::filesystem::path dir = std::filesystem::path(config.output_dir) / summary.run_id;
    std::filesystem::create_directories(dir);

    ExperimentConfig resolved = config;
    resolved.seeds = {seed};
    write_json(dir / "config.resolved.json", config_to_json(resolved));

    auto pool = std::make_shared<const RealPool>(
        RealPool::build(config.dataset.spec, config.dataset.pool_size, config.dataset.pool_seed));
    Trainer trainer(config.gan, config.apa, pool, seed);

    // Quality is judged against fresh samples from the full distribution,
    // not against the limited pool.
    Rng reference_rng = Rng::stream(seed, "reference");
    const Matrix reference = sample_distribution(config.dataset.spec, config.eval.samples, reference_rng);
    Rng eval_rng = Rng::stream(seed, "eval");
    const GridSpec grid = GridSpec::square(bounding_extent(config.dataset.spec), config.eval.hist_bins);
    const bool ring = config.dataset.spec.family == DatasetFamily::GaussianRing;

    std::ofstream csv(dir / "metrics.csv");
    {
        const auto& cols = metric_columns();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            csv << (i ? "," : "") << cols[i];
        }
        csv << '\n';
    }

    const std::int64_t total = config.gan.total_steps;
    const std::int64_t window_start = total - std::min(total, config.eval.final_window);
    double gap_sum = 0.0;
    double real_sum = 0.0;
    double fake_sum = 0.0;
    std::int64_t window_count = 0;

    try {
        for (std::int64_t s = 1; s <= total; ++s) {
            const StepRecord rec = trainer.step();
            MetricRecord m;
            m.step = rec.stats.step;
            m.mean_real_logit = rec.stats.mean_real_logit;
            m.mean_fake_logit = rec.stats.mean_fake_logit;
            m.mean_sign_real = rec.stats.mean_sign_real;
            m.mean_sign_fake = rec.stats.mean_sign_fake;
            m.lambda = rec.lambda;
            m.p = rec.p;
            m.d_loss = rec.d_loss;
            m.g_loss = rec.g_loss;
            summary.max_p = std::max(summary.max_p, rec.p);
            summary.final_p = rec.p;

            if (s > window_start) {
                gap_sum += rec.stats.mean_sign_real - rec.stats.mean_sign_fake;
                real_sum += rec.stats.mean_sign_real;
                fake_sum += rec.stats.mean_sign_fake;
                ++window_count;
            }

            if (s % config.eval_every == 0) {
                const Matrix generated = trainer.generate(config.eval.samples, eval_rng);
                m.frechet = frechet_2d(reference, generated).value;
                m.histogram_jsd = histogram_jsd(reference, generated, grid);
                if (ring) {
                    m.modes_hit = mode_coverage(generated, config.dataset.spec,
                                                config.eval.capture_radius_stds * config.dataset.spec.mode_std,
                                                config.eval.hit_threshold)
                                      .modes_hit;
                }
                summary.final_frechet = m.frechet;
                summary.final_histogram_jsd = m.histogram_jsd;
                summary.final_modes_hit = m.modes_hit;
                if (!summary.best_frechet || *m.frechet < *summary.best_frechet) {
                    summary.best_frechet = m.frechet;
                    summary.best_frechet_step = s;
                }
                if (progress) {
                    *progress << summary.run_id << " step " << s << "/" << total << " frechet "
                              << format_double(*m.frechet) << " p " << format_double(rec.p) << '\n';
                }
            }
            csv << csv_row(m) << '\n';
            summary.steps_completed = s;
        }
    } catch (const NonFiniteError& e) {
        summary.ok = false;
        summary.failed_step = e.step() > 0 ? e.step() : summary.steps_completed + 1;
        summary.error = e.what();
    }
    csv.close();

    if (window_count > 0) {
        const double n = static_cast<double>(window_count);
        summary.final_sign_gap = gap_sum / n;
        summary.final_mean_sign_real = real_sum / n;
        summary.final_mean_sign_fake = fake_sum / n;
    }

    if (trainer.controller()) {
        std::ofstream hist(dir / "p_history.csv");
        hist << "step,p,lambda\n";
        for (const auto& e : trainer.controller()->state().p_history) {
            hist << e.step << ',' << format_double(e.p) << ',' << format_double(e.lambda) << '\n';
        }
    }
    write_json(dir / "summary.json", summary.to_json());
    return summary;
}

bool ExperimentResult::ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const RunSummary& r) { return r.ok; });
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    ExperimentResult result;
    result.runs.resize(config.seeds.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallel, config.seeds.size()));

    std::mutex progress_mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
            result.runs[i] = run_single(config, config.seeds[i]);
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                const auto& r = result.runs[i];
                *options.progress << r.run_id << (r.ok ? " done" : " FAILED") << " max_p "
                                  << format_double(r.max_p) << " final_sign_gap " << format_double(r.final_sign_gap);
                if (r.final_frechet) *options.progress << " final_frechet " << format_double(*r.final_frechet);
                *options.progress << '\n';
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(work);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    return result;
}

}  // namespace apa

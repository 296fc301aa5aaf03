#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "apa/config.hpp"
#include "apa/errors.hpp"
#include "apa/gradcheck.hpp"
#include "apa/presets.hpp"
#include "apa/runner.hpp"
#include "apa/svg_report.hpp"
#include "apa/verify.hpp"

namespace {

using nlohmann::json;

int cmd_train(const std::string& config_path, const std::string& preset_name, std::size_t parallel,
              const std::string& output_dir, const std::vector<std::uint64_t>& seeds, std::int64_t steps,
              bool quiet) {
    apa::ExperimentConfig config = preset_name.empty() ? apa::load_config(config_path) : apa::preset(preset_name);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!seeds.empty()) config.seeds = seeds;
    if (steps > 0) {
        config.gan.total_steps = steps;
        if (steps % config.eval_every != 0) config.eval_every = steps;
    }
    config.validate();

    apa::RunOptions options;
    options.parallel = parallel;
    options.progress = quiet ? nullptr : &std::cerr;
    const auto result = apa::run_experiment(config, options);
    for (const auto& r : result.runs) {
        std::cout << r.to_json().dump() << '\n';
    }
    return result.ok() ? 0 : 3;
}

int cmd_verify(apa::TheoryCheckConfig config, const std::string& out, const std::string& replay) {
    if (!replay.empty()) {
        std::ifstream in(replay);
        if (!in) throw std::runtime_error("cannot open " + replay);
        const json report = json::parse(in);
        const json& failures = report.contains("failures") ? report.at("failures") : json::array({report});
        bool all_passed = true;
        json results = json::array();
        for (const auto& f : failures) {
            const auto check = apa::replay_failure(f, config);
            all_passed = all_passed && check.passed();
            results.push_back(json{{"alpha", f.at("alpha")},
                                   {"failed_checks", check.failed},
                                   {"max_residual", check.game.max_residual()},
                                   {"discriminator_gap", check.prop1.max_gap}});
        }
        std::cout << json{{"passed", all_passed}, {"replayed", results}}.dump(2) << '\n';
        return all_passed ? 0 : 1;
    }
    const auto report = apa::verify_theory(config);
    const std::string text = report.json.dump(2);
    if (!out.empty()) {
        std::ofstream(out) << text << '\n';
    }
    std::cout << text << '\n';
    return report.passed ? 0 : 1;
}

json summary_json(const apa::GradCheckSummary& s) {
    json worst = nullptr;
    double worst_err = -1.0;
    for (const auto& r : s.reports) {
        if (r.relative_error > worst_err) {
            worst_err = r.relative_error;
            worst = json{{"parameter", r.parameter_id.to_string()},
                         {"analytic", r.analytic_value},
                         {"numeric", r.numeric_value},
                         {"relative_error", r.relative_error}};
        }
    }
    return json{{"parameters", s.reports.size()},
                {"max_relative_error", s.max_relative_error},
                {"failures", s.failures},
                {"kinks_skipped", s.kinks_skipped},
                {"max_relative_error_all", s.max_relative_error_all},
                {"worst", worst}};
}

int cmd_gradcheck(std::uint64_t seed, std::size_t count, double tolerance) {
    bool passed = true;
    json nets = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto check = apa::gradcheck_gan(seed + i, {}, tolerance);
        passed = passed && check.passed();
        worst = std::max(worst, check.max_relative_error());
        nets.push_back(json{{"seed", seed + i},
                            {"discriminator", summary_json(check.discriminator)},
                            {"generator", summary_json(check.generator)}});
    }
    std::cout << json{{"passed", passed}, {"tolerance", tolerance}, {"max_relative_error", worst}, {"nets", nets}}
                     .dump(2)
              << '\n';
    return passed ? 0 : 1;
}

int cmd_presets(const std::string& write_dir) {
    for (const auto& name : apa::preset_names()) {
        if (write_dir.empty()) {
            std::cout << name << '\n';
            continue;
        }
        std::filesystem::create_directories(write_dir);
        const auto path = std::filesystem::path(write_dir) / (name + ".json");
        std::ofstream(path) << apa::config_to_json(apa::preset(name)).dump(2) << '\n';
        std::cout << path.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive pseudo augmentation for GANs on 2D toy data"};
    app.require_subcommand(1);

    std::string config_path, preset_name, output_dir;
    std::size_t parallel = 1;
    std::vector<std::uint64_t> seeds;
    std::int64_t steps = 0;
    bool quiet = false;
    auto* train = app.add_subcommand("train", "Train every seed of an experiment config");
    auto* config_opt = train->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    train->add_option("--preset", preset_name, "Built-in preset name")->excludes(config_opt);
    train->add_option("--parallel", parallel, "Seeds trained concurrently")->check(CLI::PositiveNumber);
    train->add_option("--output-dir", output_dir, "Override output_dir");
    train->add_option("--seeds", seeds, "Override the seed list");
    train->add_option("--steps", steps, "Override total_steps");
    train->add_flag("--quiet", quiet, "No progress on stderr");

    apa::TheoryCheckConfig theory;
    std::string theory_out, replay;
    auto* verify = app.add_subcommand("verify-theory", "Check the game identities on random discrete instances");
    verify->add_option("--trials", theory.trials);
    verify->add_option("--support", theory.support);
    verify->add_option("--alphas", theory.alphas)->delimiter(',');
    verify->add_option("--seed", theory.seed);
    verify->add_option("--grid-step", theory.grid_step);
    verify->add_option("--out", theory_out, "Also write the report here");
    verify->add_option("--replay", replay, "Re-check the failures of a saved report")->check(CLI::ExistingFile);

    std::uint64_t grad_seed = 1;
    std::size_t grad_count = 1;
    double grad_tol = 1e-4;
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of GAN loss gradients");
    grad->add_option("--seed", grad_seed);
    grad->add_option("--count", grad_count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    grad->add_option("--tolerance", grad_tol);

    std::vector<std::string> runs, panel_names;
    std::string out;
    auto* report = app.add_subcommand("report", "Render metrics.csv files to SVG");
    report->add_option("--runs", runs, "Run directories or metrics.csv files")->required();
    report->add_option("--panel", panel_names, "logits, signs, frechet or p (repeatable)")->required();
    report->add_option("--out", out, "Output SVG path")->required();

    std::string write_dir;
    auto* presets = app.add_subcommand("presets", "List built-in presets or write them as JSON");
    presets->add_option("--write", write_dir, "Directory to write <name>.json files into");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            if (config_path.empty() && preset_name.empty()) {
                std::cerr << "train: one of --config or --preset is required\n";
                return 2;
            }
            return cmd_train(config_path, preset_name, parallel, output_dir, seeds, steps, quiet);
        }
        if (*verify) return cmd_verify(theory, theory_out, replay);
        if (*grad) return cmd_gradcheck(grad_seed, grad_count, grad_tol);
        if (*report) {
            std::vector<apa::Panel> panels;
            for (const auto& p : panel_names) panels.push_back(apa::panel_from_string(p));
            std::vector<std::filesystem::path> paths(runs.begin(), runs.end());
            apa::write_report(paths, panels, out);
            return 0;
        }
        if (*presets) return cmd_presets(write_dir);
    } catch (const apa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "apa/config.hpp"
#include "apa/errors.hpp"
#include "apa/presets.hpp"
#include "apa/runner.hpp"
#include "apa/svg_report.hpp"

using namespace apa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("apa-unit-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig quick_config(const std::string& name, const fs::path& out) {
    ExperimentConfig c = preset("apa-limited");
    c.name = name;
    c.gan.g_widths = {8, 16, 2};
    c.gan.d_widths = {2, 16, 1};
    c.gan.total_steps = 300;
    c.eval_every = 100;
    c.eval.samples = 500;
    c.eval.final_window = 50;
    c.seeds = {1};
    c.output_dir = out.string();
    return c;
}

std::string field_of(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("config round-trips with every default materialised") {
    const ExperimentConfig c = preset("ablation-two-sided");
    const json j = config_to_json(c);
    const ExperimentConfig back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(j["apa"]["strategy"] == "adaptive-two-sided");
    CHECK(j.contains("eval"));
    CHECK(j["gan"]["total_steps"] == 30000);

    const json minimal = json::parse(R"({"name": "m"})");
    const json full = config_to_json(config_from_json(minimal));
    CHECK(full["apa"].is_null());
    CHECK(full["dataset"]["pool_size"] == 128);
    CHECK(full["gan"]["learning_rate_d"] == 0.001);
}

TEST_CASE("unknown keys and bad values are rejected by field") {
    CHECK(field_of(json::parse(R"({"nmae": "x"})")) == "nmae");
    CHECK(field_of(json::parse(R"({"apa": {"heurstic": "lambda_r"}})")) == "apa.heurstic");
    CHECK(field_of(json::parse(R"({"apa": {"heuristic": "lambda_z"}})")) == "apa.heuristic");
    CHECK(field_of(json::parse(R"({"gan": {"batch_size": "big"}})")) == "gan.batch_size");
    CHECK(field_of(json::parse(R"({"dataset": {"mode_std": -1}})")) == "dataset.mode_std");
    CHECK(field_of(json::parse(R"({"seeds": []})")) == "seeds");
    CHECK(field_of(json::parse(R"({"eval_every": 7})")) == "eval_every");
    CHECK(field_of(json::parse(R"({"apa": {"threshold": 1.5}})")) == "apa.threshold");
}

TEST_CASE("shipped preset files match the built-in presets") {
    const fs::path dir = fs::path(APA_SOURCE_DIR) / "presets";
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const fs::path file = dir / (name + ".json");
        REQUIRE(fs::exists(file));
        CHECK(config_to_json(load_config(file)) == config_to_json(preset(name)));
    }
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("preset arms differ only where intended") {
    const auto base = preset("apa-limited");
    CHECK(preset("baseline-limited").apa == std::nullopt);
    CHECK(preset("baseline-ample").dataset.pool_size == 50'000);
    CHECK(preset("apa-ample").apa.has_value());
    CHECK(preset("ablation-lambda-f").apa->heuristic == HeuristicKind::LambdaF);
    CHECK(preset("ablation-lambda-rf").apa->heuristic == HeuristicKind::LambdaRF);
    CHECK(preset("ablation-fixed-p0.5").apa->strategy == StrategyKind::Fixed);
    CHECK(preset("ablation-fixed-p0.5").apa->p_fixed == 0.5);
    CHECK(preset("ablation-t0.4").apa->threshold == 0.4);
    CHECK(preset("ablation-t0.8").apa->threshold == 0.8);
    CHECK(preset("ablation-t0.6").apa->threshold == base.apa->threshold);
    CHECK(preset("instance-noise").gan.baseline.kind == BaselineKind::InstanceNoise);
    CHECK(preset("label-smoothing-0.9").gan.baseline.real_target == 0.9);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
}

TEST_CASE("csv formatting round-trips doubles") {
    const double v = 0.1 + 0.2;
    CHECK(std::stod(format_double(v)) == v);
    MetricRecord r;
    r.step = 3;
    r.p = 0.000512;
    const std::string row = csv_row(r);
    CHECK(row.substr(row.size() - 3) == ",,,");
    r.frechet = 1.5;
    r.histogram_jsd = 0.25;
    r.modes_hit = 8;
    CHECK(csv_row(r).ends_with(",1.5,0.25,8"));
}

TEST_CASE("a run writes its artifacts and is byte-reproducible") {
    const fs::path out = scratch("run");
    const auto cfg = quick_config("quick", out);
    const auto s = run_single(cfg, 1);
    CHECK(s.ok);
    CHECK(s.run_id == "quick-seed1");
    CHECK(s.steps_completed == 300);
    const fs::path dir = out / "quick-seed1";
    REQUIRE(fs::exists(dir / "metrics.csv"));
    REQUIRE(fs::exists(dir / "config.resolved.json"));
    REQUIRE(fs::exists(dir / "summary.json"));
    REQUIRE(fs::exists(dir / "p_history.csv"));

    const std::string csv = slurp(dir / "metrics.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "step,mean_real_logit,mean_fake_logit,mean_sign_real,mean_sign_fake,lambda,p,d_loss,g_loss,"
                    "frechet,histogram_jsd,modes_hit");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        ++rows;
        const bool eval = rows % 100 == 0;
        CHECK((line.back() == ',') == !eval);
    }
    CHECK(rows == 300);

    const json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["status"] == "ok");
    CHECK(summary["failed_step"].is_null());
    CHECK(summary.contains("max_p"));
    CHECK(summary.contains("best_frechet"));
    CHECK(summary.contains("started_at"));

    const json resolved = json::parse(slurp(dir / "config.resolved.json"));
    CHECK(resolved["seeds"] == json::array({1}));
    CHECK(config_to_json(config_from_json(resolved)) == resolved);

    run_single(cfg, 1);
    CHECK(slurp(dir / "metrics.csv") == csv);
    // only the timestamp may differ between two summaries
    json again = json::parse(slurp(dir / "summary.json"));
    json first = summary;
    again.erase("started_at");
    first.erase("started_at");
    CHECK(again == first);
}

TEST_CASE("seeds run to separate directories, in parallel or not") {
    const fs::path out = scratch("seeds");
    auto cfg = quick_config("multi", out);
    cfg.gan.total_steps = 100;
    cfg.seeds = {1, 2, 3};
    RunOptions opts;
    opts.parallel = 3;
    const auto r = run_experiment(cfg, opts);
    REQUIRE(r.runs.size() == 3);
    CHECK(r.ok());
    CHECK(r.runs[2].run_id == "multi-seed3");
    const std::string parallel_csv = slurp(out / "multi-seed2" / "metrics.csv");
    CHECK(parallel_csv != slurp(out / "multi-seed1" / "metrics.csv"));
    run_experiment(cfg);
    CHECK(slurp(out / "multi-seed2" / "metrics.csv") == parallel_csv);
}

TEST_CASE("non-finite loss ends the run with the step recorded") {
    const fs::path out = scratch("nan");
    auto cfg = quick_config("blowup", out);
    cfg.gan.learning_rate_d = 1e300;
    cfg.gan.learning_rate_g = 1e300;
    const auto s = run_single(cfg, 1);
    CHECK_FALSE(s.ok);
    REQUIRE(s.failed_step.has_value());
    CHECK(*s.failed_step >= 1);
    CHECK(*s.failed_step <= 300);
    const json j = json::parse(slurp(out / "blowup-seed1" / "summary.json"));
    CHECK(j["status"] == "failed");
    CHECK(j["failed_step"] == *s.failed_step);
}

TEST_CASE("svg report is byte-stable and labels every series") {
    const fs::path out = scratch("report");
    auto cfg = quick_config("rep", out);
    cfg.seeds = {1, 2};
    run_experiment(cfg);
    const std::vector<fs::path> runs{out / "rep-seed1", out / "rep-seed2"};
    write_report({runs[0]}, {Panel::Logits}, out / "one.svg");
    const std::string one = slurp(out / "one.svg");
    CHECK(one.find("rep-seed1 real") != std::string::npos);
    CHECK(one.find("rep-seed1 fake") != std::string::npos);
    CHECK(one.find("<polyline") != std::string::npos);

    write_report(runs, {Panel::Frechet, Panel::P}, out / "a.svg");
    write_report(runs, {Panel::Frechet, Panel::P}, out / "b.svg");
    CHECK(slurp(out / "a.svg") == slurp(out / "b.svg"));
    CHECK(slurp(out / "a.svg").find("Deception probability") != std::string::npos);
}

TEST_CASE("report rejects a metrics file with a missing column") {
    const fs::path dir = scratch("schema");
    std::ofstream(dir / "metrics.csv") << "step,mean_real_logit,mean_fake_logit\n1,0.5,0.25\n";
    try {
        load_runs({dir});
        FAIL("expected schema error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("missing column 'mean_sign_real'") != std::string::npos);
    }
    CHECK_THROWS(panel_from_string("losses"));
}

TEST_CASE("downsampling keeps short series and averages long ones") {
    Series s;
    for (int i = 0; i < 1000; ++i) {
        s.x.push_back(i);
        s.y.push_back(i % 2);
    }
    const auto d = downsample(s, 100);
    CHECK(d.x.size() == 100);
    CHECK(d.y[0] == doctest::Approx(0.5));
    CHECK(downsample(d, 400).x.size() == 100);
}

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "apa/config.hpp"
#include "apa/controller.hpp"
#include "apa/errors.hpp"
#include "apa/gradcheck.hpp"
#include "apa/metrics.hpp"
#include "apa/presets.hpp"
#include "apa/runner.hpp"
#include "apa/svg_report.hpp"
#include "apa/theory.hpp"
#include "apa/verify.hpp"

namespace py = pybind11;
using namespace apa;

namespace {

DiscreteDistribution dist(const std::vector<double>& p) { return DiscreteDistribution(p); }

ExperimentConfig parse_config(const std::string& text) { return config_from_json(nlohmann::json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive pseudo augmentation for GANs on 2D toy data";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NonFiniteError>(m, "NonFiniteError", PyExc_ArithmeticError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

    // theory
    m.def(
        "optimal_discriminator",
        [](const std::vector<double>& p_data, const std::vector<double>& p_g, double alpha) {
            const auto d = optimal_discriminator(dist(p_data), dist(p_g), alpha);
            return py::make_tuple(d.support, d.values);
        },
        py::arg("p_data"), py::arg("p_g"), py::arg("alpha"),
        "Returns (support indices, D* values) on the union support.");
    m.def(
        "virtual_criterion",
        [](const std::vector<double>& p_data, const std::vector<double>& p_g, double alpha) {
            const auto g = virtual_criterion(dist(p_data), dist(p_g), alpha);
            py::dict d;
            d["value"] = g.value_v;
            d["criterion"] = g.criterion_c;
            d["criterion_kld"] = g.criterion_kld;
            d["criterion_jsd"] = g.criterion_jsd;
            d["max_residual"] = g.max_residual();
            return d;
        },
        py::arg("p_data"), py::arg("p_g"), py::arg("alpha"));
    m.def("kld", [](const std::vector<double>& p, const std::vector<double>& q) { return kld(p, q); });
    m.def("jsd", [](const std::vector<double>& p, const std::vector<double>& q) { return jsd(p, q); });
    m.def(
        "verify_theory",
        [](std::size_t trials, std::size_t support, std::vector<double> alphas, std::uint64_t seed) {
            TheoryCheckConfig c;
            c.trials = trials;
            c.support = support;
            c.alphas = std::move(alphas);
            c.seed = seed;
            return verify_theory(c).json.dump();
        },
        py::arg("trials") = 1000, py::arg("support") = 8,
        py::arg("alphas") = std::vector<double>{0.0, 0.25, 0.5, 0.9}, py::arg("seed") = 1,
        "JSON report text.");

    // controller
    m.def("compute_lambda", [](const std::string& kind, double real, double fake) {
        return compute_lambda(heuristic_from_string(kind), real, fake);
    });
    m.def(
        "step_size",
        [](std::int64_t adjust_every, std::int64_t batch_size, std::int64_t ramp_images) {
            ControllerConfig c;
            c.adjust_every = adjust_every;
            c.batch_size = batch_size;
            c.ramp_images = ramp_images;
            return c.step_size();
        },
        py::arg("adjust_every") = 4, py::arg("batch_size") = 64, py::arg("ramp_images") = 500'000);
    m.def(
        "draw_mask",
        [](double p, std::size_t n, std::uint64_t seed) {
            Rng rng(seed);
            return draw_mask(p, n, rng).flags;
        },
        py::arg("p"), py::arg("n"), py::arg("seed"));

    // data and metrics
    m.def(
        "sample_ring",
        [](std::size_t n, std::uint64_t seed, std::size_t modes, double radius, double mode_std) {
            Rng rng(seed);
            return sample_distribution(DatasetSpec::ring(modes, radius, mode_std), n, rng);
        },
        py::arg("n"), py::arg("seed"), py::arg("modes") = 8, py::arg("radius") = 2.0, py::arg("mode_std") = 0.02);
    m.def("frechet_2d", [](const Matrix& a, const Matrix& b) { return frechet_2d(a, b).value; });
    m.def(
        "histogram_jsd",
        [](const Matrix& a, const Matrix& b, double extent, std::size_t bins) {
            return histogram_jsd(a, b, GridSpec::square(extent, bins));
        },
        py::arg("real"), py::arg("fake"), py::arg("extent") = 3.0, py::arg("bins") = 64);
    m.def(
        "modes_hit",
        [](const Matrix& fake, std::size_t modes, double radius, double mode_std, double capture, std::size_t threshold) {
            return mode_coverage(fake, DatasetSpec::ring(modes, radius, mode_std), capture, threshold).modes_hit;
        },
        py::arg("fake"), py::arg("modes") = 8, py::arg("radius") = 2.0, py::arg("mode_std") = 0.02,
        py::arg("capture_radius") = 0.06, py::arg("hit_threshold") = 10);

    // gradients
    m.def(
        "gradcheck",
        [](std::uint64_t seed) {
            const auto r = gradcheck_gan(seed);
            return py::make_tuple(r.passed(), r.max_relative_error());
        },
        py::arg("seed"), "Returns (passed, max relative error) for a seeded G/D pair.");

    // experiments
    m.def("preset_names", &preset_names);
    m.def("preset", [](const std::string& name) { return config_to_json(preset(name)).dump(); });
    m.def("resolve_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); });
    m.def(
        "train",
        [](const std::string& config_text, std::size_t parallel) {
            const ExperimentConfig cfg = parse_config(config_text);
            RunOptions opts;
            opts.parallel = parallel;
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg, opts);
            }
            std::vector<std::string> out;
            for (const auto& s : r.runs) out.push_back(s.to_json().dump());
            return out;
        },
        py::arg("config"), py::arg("parallel") = 1, "Runs every seed; returns summary JSON texts.");
    m.def(
        "report",
        [](const std::vector<std::filesystem::path>& runs, const std::vector<std::string>& panels,
           const std::filesystem::path& out) {
            std::vector<Panel> ps;
            for (const auto& p : panels) ps.push_back(panel_from_string(p));
            write_report(runs, ps, out);
        },
        py::arg("runs"), py::arg("panels"), py::arg("out"));
}

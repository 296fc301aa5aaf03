#include "apa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apa {

using nlohmann::json;

namespace {

constexpr double kLog4 = 1.3862943611198906;

json instance_json(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha) {
    return json{{"alpha", alpha}, {"p_data", p_data.probs()}, {"p_g", p_g.probs()}};
}

// Classic GAN quantities, computed without the alpha-aware code path.
double classic_reduction_error(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g,
                               const DiscriminatorVector& d, double criterion) {
    double err = 0.0;
    for (std::size_t k = 0; k < d.support.size(); ++k) {
        const std::size_t i = d.support[k];
        err = std::max(err, std::abs(d.values[k] - p_data[i] / (p_data[i] + p_g[i])));
    }
    return std::max(err, std::abs(criterion - (-kLog4 + 2.0 * jsd(p_data, p_g))));
}

}  // namespace

void TheoryCheckConfig::validate() const {
    if (support < 2 || support > 64) throw std::invalid_argument("support must be in [2, 64]");
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    if (alphas.empty()) throw std::invalid_argument("alphas must be non-empty");
    for (double a : alphas) {
        if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("alpha must be in [0, 1)");
    }
    if (!(grid_step > 0.0 && grid_step < 0.5)) throw std::invalid_argument("grid_step must be in (0, 0.5)");
}

TheoryInstance theory_instance(const TheoryCheckConfig& config, std::size_t alpha_index, std::size_t trial) {
    Rng rng = Rng::stream(config.seed, "theory/" + std::to_string(alpha_index) + "/" + std::to_string(trial));
    const double zero_fraction = trial % 2 == 1 ? 0.3 : 0.0;
    auto p_data = DiscreteDistribution::random(config.support, rng, zero_fraction);
    auto p_g = DiscreteDistribution::random(config.support, rng, zero_fraction);
    return TheoryInstance{config.alphas.at(alpha_index), alpha_index, trial, std::move(p_data), std::move(p_g)};
}

InstanceCheck check_instance(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                             const TheoryCheckConfig& config, const DiscriminatorFn& dstar) {
    InstanceCheck c;
    c.game = virtual_criterion(p_data, p_g, alpha, dstar);
    c.prop1 = verify_prop1(p_data, p_g, alpha, config.grid_step, dstar);
    c.prop2 = verify_prop2(p_data, p_g, alpha, dstar);

    const DiscriminatorVector d = dstar(p_data, p_g, alpha);
    // D* = 1 where p_g vanishes, and D* = 0 where p_data vanishes at alpha = 0;
    // everywhere else the value is strictly inside (0, 1).
    for (std::size_t k = 0; k < d.support.size(); ++k) {
        const std::size_t i = d.support[k];
        const double v = d.values[k];
        const bool interior = p_g[i] > 0.0 && (p_data[i] > 0.0 || alpha > 0.0);
        if (interior ? !(v > 0.0 && v < 1.0) : !(v >= 0.0 && v <= 1.0)) c.dstar_in_range = false;
    }
    if (alpha == 0.0) c.reduction_error = classic_reduction_error(p_data, p_g, d, c.game.criterion_c);

    if (!(c.game.max_residual() < config.identity_tolerance)) c.failed.push_back("criterion_identity");
    if (!c.prop1.passed) c.failed.push_back("optimal_discriminator");
    if (!c.prop2.passed) c.failed.push_back("global_minimum");
    if (!c.dstar_in_range) c.failed.push_back("discriminator_range");
    if (!(c.reduction_error < config.identity_tolerance)) c.failed.push_back("classic_reduction");
    return c;
}

TheoryReport verify_theory(const TheoryCheckConfig& config, const DiscriminatorFn& dstar) {
    config.validate();
    TheoryReport report;
    json per_alpha = json::array();
    json failures = json::array();
    std::size_t failure_count = 0;
    double worst_residual = 0.0;
    double worst_gap = 0.0;

    auto record_failure = [&](const InstanceCheck& c, json instance, std::size_t alpha_index, std::size_t trial,
                              const std::string& kind) {
        ++failure_count;
        if (failures.size() >= config.max_serialized_failures) return;
        instance["alpha_index"] = alpha_index;
        instance["trial"] = trial;
        instance["kind"] = kind;
        instance["failed_checks"] = c.failed;
        failures.push_back(std::move(instance));
    };

    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        const double alpha = config.alphas[a];
        double res_c_kld = 0.0;
        double res_c_jsd = 0.0;
        double res_kld_jsd = 0.0;
        double max_gap = 0.0;
        double min_value_margin = std::numeric_limits<double>::infinity();
        double min_criterion_gap = std::numeric_limits<double>::infinity();
        double max_reduction = 0.0;
        double equal_max_gap = 0.0;
        std::size_t failed = 0;

        for (std::size_t t = 0; t < config.trials; ++t) {
            const TheoryInstance inst = theory_instance(config, a, t);
            const InstanceCheck c = check_instance(inst.p_data, inst.p_g, alpha, config, dstar);
            res_c_kld = std::max(res_c_kld, c.game.residual_c_kld);
            res_c_jsd = std::max(res_c_jsd, c.game.residual_c_jsd);
            res_kld_jsd = std::max(res_kld_jsd, c.game.residual_kld_jsd);
            max_gap = std::max(max_gap, c.prop1.max_gap);
            min_value_margin = std::min(min_value_margin, c.prop1.value_at_optimum - c.prop1.value_at_grid);
            min_criterion_gap = std::min(min_criterion_gap, c.prop2.gap);
            max_reduction = std::max(max_reduction, c.reduction_error);
            if (!c.passed()) {
                ++failed;
                record_failure(c, instance_json(inst.p_data, inst.p_g, alpha), a, t, "random");
            }

            // Same trial with p_g set equal to p_data: the criterion must sit at
            // its global minimum.
            const InstanceCheck eq = check_instance(inst.p_data, inst.p_data, alpha, config, dstar);
            equal_max_gap = std::max(equal_max_gap, std::abs(eq.prop2.gap));
            if (!eq.passed() || !eq.prop2.at_minimum) {
                ++failed;
                record_failure(eq, instance_json(inst.p_data, inst.p_data, alpha), a, t, "equal");
            }
        }
        worst_residual = std::max({worst_residual, res_c_kld, res_c_jsd, res_kld_jsd});
        worst_gap = std::max(worst_gap, max_gap);

        json entry{
            {"alpha", alpha},
            {"trials", config.trials},
            {"worst_residual_c_kld", res_c_kld},
            {"worst_residual_c_jsd", res_c_jsd},
            {"worst_residual_kld_jsd", res_kld_jsd},
            {"worst_discriminator_gap", max_gap},
            {"min_value_margin", min_value_margin},
            {"min_criterion_gap", min_criterion_gap},
            {"equal_pair_max_gap", equal_max_gap},
            {"failed_instances", failed},
        };
        if (alpha == 0.0) entry["classic_reduction_max_error"] = max_reduction;
        per_alpha.push_back(std::move(entry));
    }

    report.passed = failure_count == 0;
    report.json = json{
        {"passed", report.passed},
        {"trials", config.trials},
        {"support", config.support},
        {"alphas", config.alphas},
        {"seed", config.seed},
        {"grid_step", config.grid_step},
        {"identity_tolerance", config.identity_tolerance},
        {"worst_residual", worst_residual},
        {"worst_discriminator_gap", worst_gap},
        {"per_alpha", std::move(per_alpha)},
        {"failure_count", failure_count},
        {"failures", std::move(failures)},
    };
    return report;
}

InstanceCheck replay_failure(const json& failure, const TheoryCheckConfig& config, const DiscriminatorFn& dstar) {
    const DiscreteDistribution p_data(failure.at("p_data").get<std::vector<double>>());
    const DiscreteDistribution p_g(failure.at("p_g").get<std::vector<double>>());
    return check_instance(p_data, p_g, failure.at("alpha").get<double>(), config, dstar);
}

}  // namespace apa

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apa/grad.hpp"

namespace apa {

struct GradientReport {
    ParameterId parameter_id;
    double analytic_value = 0.0;
    double numeric_value = 0.0;
    double relative_error = 0.0;
    // The +h and -h evaluations put some leaky-rectifier input on opposite
    // sides of zero, so the central difference straddles a kink.
    bool kink_crossed = false;
};

/// |a - n| / max(1e-12, |a| + |n|)
double relative_error(double analytic, double numeric);

using LossBuilder = std::function<Var(Tape&, const NetBinding&)>;

std::vector<double> analytic_gradients(const DifferentiableNet& net, const LossBuilder& loss);

struct NumericGradients {
    std::vector<double> values;
    std::vector<bool> kink_crossed;
};

/// Central differences with step h on every parameter.
NumericGradients numeric_gradients_checked(const DifferentiableNet& net, const LossBuilder& loss, double h = 1e-5);
std::vector<double> numeric_gradients(const DifferentiableNet& net, const LossBuilder& loss, double h = 1e-5);

std::vector<GradientReport> compare_gradients(const DifferentiableNet& net, const std::vector<double>& analytic,
                                              const std::vector<double>& numeric,
                                              const std::vector<bool>& kink_crossed = {});

/// Reports that straddle a kink are kept but do not count towards
/// max_relative_error or failures.
struct GradCheckSummary {
    std::vector<GradientReport> reports;
    double max_relative_error = 0.0;
    double max_relative_error_all = 0.0;  // including kink-straddling reports
    std::size_t failures = 0;
    std::size_t kinks_skipped = 0;
    bool passed = true;
};

GradCheckSummary summarize(std::vector<GradientReport> reports, double tolerance = 1e-4);

/// Rejects networks above 10,000 parameters.
GradCheckSummary gradcheck(const DifferentiableNet& net, const LossBuilder& loss, double h = 1e-5,
                           double tolerance = 1e-4);

enum class LossKind {
    Quadratic,  // mean squared error against random targets
    Softplus,   // mean softplus of the outputs
};

/// Random net (he_normal from `seed`), random input batch, the named loss.
GradCheckSummary gradcheck(const std::vector<std::size_t>& widths, LossKind loss, std::uint64_t seed,
                           double tolerance = 1e-4);

struct GanGradCheckSpec {
    std::size_t latent_dim = 4;
    std::vector<std::size_t> g_widths{4, 16, 16, 2};
    std::vector<std::size_t> d_widths{2, 16, 16, 1};
    std::size_t batch_size = 8;
    double real_target = 1.0;
};

struct GanGradCheck {
    GradCheckSummary discriminator;  // discriminator loss wrt D
    GradCheckSummary generator;      // generator loss through D wrt G
    bool passed() const { return discriminator.passed && generator.passed; }
    double max_relative_error() const;
};

/// Full GAN losses on a seeded random generator/discriminator pair.
GanGradCheck gradcheck_gan(std::uint64_t seed, const GanGradCheckSpec& spec = {}, double tolerance = 1e-4);

}  // namespace apa

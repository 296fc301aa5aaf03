#include "apa/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "apa/errors.hpp"
#include "apa/gan.hpp"

namespace apa {

double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate(const DifferentiableNet& net, const LossBuilder& loss, std::vector<bool>* pattern = nullptr) {
    Tape tape;
    const NetBinding b = bind(tape, net, false);
    const double v = tape.scalar(loss(tape, b));
    if (pattern) *pattern = tape.activation_pattern();
    return v;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

}  // namespace

std::vector<double> analytic_gradients(const DifferentiableNet& net, const LossBuilder& loss) {
    Tape tape;
    const NetBinding b = bind(tape, net, true);
    tape.backward(loss(tape, b));
    return flatten(gradients(tape, b));
}

NumericGradients numeric_gradients_checked(const DifferentiableNet& net, const LossBuilder& loss, double h) {
    DifferentiableNet probe = net;
    NumericGradients out;
    out.values.resize(net.parameter_count());
    out.kink_crossed.resize(net.parameter_count());
    std::vector<bool> up_pattern, down_pattern;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double& theta = probe.parameter(i);
        const double saved = theta;
        theta = saved + h;
        const double up = evaluate(probe, loss, &up_pattern);
        theta = saved - h;
        const double down = evaluate(probe, loss, &down_pattern);
        theta = saved;
        out.values[i] = (up - down) / (2.0 * h);
        out.kink_crossed[i] = up_pattern != down_pattern;
    }
    return out;
}

std::vector<double> numeric_gradients(const DifferentiableNet& net, const LossBuilder& loss, double h) {
    return numeric_gradients_checked(net, loss, h).values;
}

std::vector<GradientReport> compare_gradients(const DifferentiableNet& net, const std::vector<double>& analytic,
                                              const std::vector<double>& numeric,
                                              const std::vector<bool>& kink_crossed) {
    if (analytic.size() != net.parameter_count() || numeric.size() != net.parameter_count()) {
        throw ShapeError("compare_gradients: gradient vectors do not match the parameter count");
    }
    std::vector<GradientReport> reports;
    reports.reserve(analytic.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const bool kink = i < kink_crossed.size() && kink_crossed[i];
        reports.push_back(
            {net.parameter_id(i), analytic[i], numeric[i], relative_error(analytic[i], numeric[i]), kink});
    }
    return reports;
}

GradCheckSummary summarize(std::vector<GradientReport> reports, double tolerance) {
    GradCheckSummary s;
    for (const auto& r : reports) {
        s.max_relative_error_all = std::max(s.max_relative_error_all, r.relative_error);
        if (r.kink_crossed) {
            ++s.kinks_skipped;
            continue;
        }
        s.max_relative_error = std::max(s.max_relative_error, r.relative_error);
        if (!(r.relative_error < tolerance)) {
            ++s.failures;
        }
    }
    s.passed = s.failures == 0;
    s.reports = std::move(reports);
    return s;
}

GradCheckSummary gradcheck(const DifferentiableNet& net, const LossBuilder& loss, double h, double tolerance) {
    if (net.parameter_count() > 10'000) {
        throw std::invalid_argument("gradcheck: network has more than 10,000 parameters");
    }
    const NumericGradients numeric = numeric_gradients_checked(net, loss, h);
    return summarize(compare_gradients(net, analytic_gradients(net, loss), numeric.values, numeric.kink_crossed),
                     tolerance);
}

GradCheckSummary gradcheck(const std::vector<std::size_t>& widths, LossKind loss, std::uint64_t seed,
                           double tolerance) {
    Rng init = Rng::stream(seed, "init");
    const DifferentiableNet net = DifferentiableNet::he_normal(widths, init);
    Rng data = Rng::stream(seed, "data");
    const Eigen::Index batch = 8;
    const Matrix input = random_matrix(batch, static_cast<Eigen::Index>(widths.front()), data);
    const Matrix target = random_matrix(batch, static_cast<Eigen::Index>(widths.back()), data);

    LossBuilder builder;
    if (loss == LossKind::Quadratic) {
        builder = [&](Tape& t, const NetBinding& b) {
            Var diff = t.sub(forward(t, b, t.constant(input)), t.constant(target));
            return t.mean(t.mul(diff, diff));
        };
    } else {
        builder = [&](Tape& t, const NetBinding& b) { return t.mean(t.softplus(forward(t, b, t.constant(input)))); };
    }
    return gradcheck(net, builder, 1e-5, tolerance);
}

double GanGradCheck::max_relative_error() const {
    return std::max(discriminator.max_relative_error, generator.max_relative_error);
}

GanGradCheck gradcheck_gan(std::uint64_t seed, const GanGradCheckSpec& spec, double tolerance) {
    Rng init = Rng::stream(seed, "init");
    const DifferentiableNet generator = DifferentiableNet::he_normal(spec.g_widths, init);
    const DifferentiableNet discriminator = DifferentiableNet::he_normal(spec.d_widths, init);
    Rng data = Rng::stream(seed, "data");
    const auto n = static_cast<Eigen::Index>(spec.batch_size);
    const Matrix real = random_matrix(n, 2, data);
    const Matrix z_d = random_matrix(n, static_cast<Eigen::Index>(spec.latent_dim), data);
    const Matrix z_g = random_matrix(n, static_cast<Eigen::Index>(spec.latent_dim), data);
    const Matrix fake = generator.forward(z_d);
    const double target = spec.real_target;

    GanGradCheck out;
    out.discriminator = gradcheck(
        discriminator,
        [&](Tape& t, const NetBinding& d) {
            Var r = forward(t, d, t.constant(real));
            Var f = forward(t, d, t.constant(fake));
            return d_loss(t, r, f, target);
        },
        1e-5, tolerance);
    out.generator = gradcheck(
        generator,
        [&](Tape& t, const NetBinding& g) {
            const NetBinding d = bind(t, discriminator, false);
            Var x = forward(t, g, t.constant(z_g));
            return g_loss(t, forward(t, d, x));
        },
        1e-5, tolerance);
    return out;
}

}  // namespace apa

#include "apa/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace apa {

namespace {

const double kLog4 = std::log(4.0);

void same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": distributions have different support lengths");
    }
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("DiscreteDistribution: empty support");
    }
    double sum = 0.0;
    for (double v : probs_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("DiscreteDistribution: entries must be finite and non-negative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("DiscreteDistribution: entries sum to " + std::to_string(sum) + ", not 1");
    }
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
    return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteDistribution DiscreteDistribution::random(std::size_t n, Rng& rng, double zero_fraction) {
    std::vector<double> w(n);
    for (auto& x : w) {
        x = -std::log(1.0 - rng.uniform());
    }
    if (zero_fraction > 0.0) {
        const std::size_t keep = rng.index(n);
        for (std::size_t i = 0; i < n; ++i) {
            const bool drop = rng.uniform() < zero_fraction;
            if (drop && i != keep) {
                w[i] = 0.0;
            }
        }
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) {
        x /= total;
    }
    return DiscreteDistribution(std::move(w));
}

void GameParams::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must satisfy 0 <= alpha < 1");
    }
}

DiscriminatorVector optimal_discriminator(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g,
                                          double alpha) {
    same_size(p_data.size(), p_g.size(), "optimal_discriminator");
    GameParams{alpha}.validate();
    DiscriminatorVector d;
    for (std::size_t i = 0; i < p_data.size(); ++i) {
        if (p_data[i] == 0.0 && p_g[i] == 0.0) {
            continue;
        }
        const double num = (1.0 - alpha) * p_data[i] + alpha * p_g[i];
        const double den = (1.0 - alpha) * p_data[i] + (1.0 + alpha) * p_g[i];
        d.support.push_back(i);
        d.values.push_back(num / den);
    }
    return d;
}

namespace {

// weight * log(arg), with 0 * log(anything) = 0.
double weighted_log(double weight, double arg) {
    if (weight == 0.0) {
        return 0.0;
    }
    if (!(arg > 0.0) || !(arg <= 1.0)) {
        throw std::domain_error("value_function: log argument " + std::to_string(arg) + " outside (0, 1]");
    }
    return weight * std::log(arg);
}

}  // namespace

double value_function(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                      const DiscriminatorVector& d) {
    same_size(p_data.size(), p_g.size(), "value_function");
    GameParams{alpha}.validate();
    if (d.support.size() != d.values.size()) {
        throw std::invalid_argument("value_function: discriminator support and values differ in length");
    }
    double v = 0.0;
    for (std::size_t k = 0; k < d.support.size(); ++k) {
        const std::size_t i = d.support.at(k);
        const double y = d.values[k];
        v += weighted_log((1.0 - alpha) * p_data[i] + alpha * p_g[i], y);
        v += weighted_log(p_g[i], 1.0 - y);
    }
    return v;
}

double kld(std::span<const double> p, std::span<const double> q) {
    same_size(p.size(), q.size(), "kld");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        if (q[i] == 0.0) {
            throw std::invalid_argument("kld: p is not absolutely continuous with respect to q");
        }
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) {
            h -= v * std::log(v);
        }
    }
    return h;
}

// Entropy form H(m) - (H(p) + H(q)) / 2, which equals (kld(p,m) + kld(q,m)) / 2.
double jsd(std::span<const double> p, std::span<const double> q) {
    same_size(p.size(), q.size(), "jsd");
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = 0.5 * (p[i] + q[i]);
    }
    const double value = entropy(m) - 0.5 * (entropy(p) + entropy(q));
    return std::clamp(value, 0.0, std::numbers::ln2);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    same_size(p.size(), q.size(), "total_variation");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p[i] - q[i]);
    }
    return 0.5 * s;
}

std::vector<double> smoothed_data(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha) {
    same_size(p_data.size(), p_g.size(), "smoothed_data");
    std::vector<double> s(p_data.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = (1.0 - alpha) * p_data[i] + alpha * p_g[i];
    }
    return s;
}

Prop1Report verify_prop1(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                         double grid_step, const DiscriminatorFn& dstar) {
    same_size(p_data.size(), p_g.size(), "verify_prop1");
    if (!(grid_step > 0.0 && grid_step <= 1e-3)) {
        throw std::invalid_argument("verify_prop1: grid_step must lie in (0, 1e-3]");
    }
    if (p_data.size() > 64) {
        throw std::invalid_argument("verify_prop1: support size above 64");
    }
    const auto cells = static_cast<long>(std::llround(1.0 / grid_step));
    Prop1Report r;
    r.grid_step = grid_step;

    const DiscriminatorVector closed = dstar(p_data, p_g, alpha);
    DiscriminatorVector grid;
    grid.support = closed.support;
    bool shape_ok = closed.values.size() == closed.support.size();

    for (std::size_t k = 0; k < closed.support.size() && shape_ok; ++k) {
        const std::size_t i = closed.support[k];
        const double m = (1.0 - alpha) * p_data[i] + alpha * p_g[i];
        const double n = p_g[i];
        double best_y = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (long c = 1; c < cells; ++c) {
            const double y = static_cast<double>(c) / static_cast<double>(cells);
            const double f = (m > 0.0 ? m * std::log(y) : 0.0) + (n > 0.0 ? n * std::log1p(-y) : 0.0);
            if (f > best) {
                best = f;
                best_y = y;
            }
        }
        grid.values.push_back(best_y);
        const double value = closed.values[k];
        const double gap = std::isfinite(value) ? std::abs(best_y - value) : std::numeric_limits<double>::infinity();
        r.max_gap = std::max(r.max_gap, gap);
    }
    // The grid point nearest an endpoint optimum sits exactly one step away;
    // allow for the rounding in 1 - (K-1)/K.
    r.gaps_ok = shape_ok && r.max_gap <= grid_step * (1.0 + 1e-9);

    try {
        r.value_at_optimum = value_function(p_data, p_g, alpha, closed);
        r.value_at_grid = value_function(p_data, p_g, alpha, grid);
        r.value_ok = r.value_at_optimum >= r.value_at_grid - 1e-9;
    } catch (const std::exception&) {
        r.value_at_optimum = std::numeric_limits<double>::quiet_NaN();
        r.value_ok = false;
    }
    r.passed = r.gaps_ok && r.value_ok;
    return r;
}

double GameEval::max_residual() const {
    return std::max({residual_c_kld, residual_c_jsd, residual_kld_jsd});
}

GameEval virtual_criterion(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                           const DiscriminatorFn& dstar) {
    same_size(p_data.size(), p_g.size(), "virtual_criterion");
    GameParams{alpha}.validate();
    GameEval e;
    const DiscriminatorVector d = dstar(p_data, p_g, alpha);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Expectation form: (1-a) E_data[log D*] + a E_g[log D*] + E_g[log(1 - D*)].
    try {
        e.value_v = value_function(p_data, p_g, alpha, d);
        double data_term = 0.0;
        double gen_real_term = 0.0;
        double gen_fake_term = 0.0;
        for (std::size_t k = 0; k < d.support.size(); ++k) {
            const std::size_t i = d.support[k];
            data_term += weighted_log((1.0 - alpha) * p_data[i], d.values[k]);
            gen_real_term += weighted_log(alpha * p_g[i], d.values[k]);
            gen_fake_term += weighted_log(p_g[i], 1.0 - d.values[k]);
        }
        e.criterion_c = data_term + gen_real_term + gen_fake_term;
    } catch (const std::domain_error&) {
        e.value_v = nan;
        e.criterion_c = nan;
    }

    // KL form against the mixture ((1-a) p_data + (1+a) p_g) / 2.
    const std::vector<double> smoothed = smoothed_data(p_data, p_g, alpha);
    std::vector<double> mixture(p_data.size());
    for (std::size_t i = 0; i < mixture.size(); ++i) {
        mixture[i] = ((1.0 - alpha) * p_data[i] + (1.0 + alpha) * p_g[i]) / 2.0;
    }
    e.kld_data = kld(smoothed, mixture);
    e.kld_gen = kld(p_g.probs(), mixture);
    e.criterion_kld = -kLog4 + e.kld_data + e.kld_gen;

    // JS form between the smoothed data distribution and p_g.
    e.jsd_term = jsd(smoothed, p_g.probs());
    e.criterion_jsd = -kLog4 + 2.0 * e.jsd_term;

    auto residual = [](double a, double b) {
        const double r = std::abs(a - b);
        return std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
    };
    e.residual_c_kld = residual(e.criterion_c, e.criterion_kld);
    e.residual_c_jsd = residual(e.criterion_c, e.criterion_jsd);
    e.residual_kld_jsd = residual(e.criterion_kld, e.criterion_jsd);
    return e;
}

Prop2Report verify_prop2(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                         const DiscriminatorFn& dstar) {
    const GameEval e = virtual_criterion(p_data, p_g, alpha, dstar);
    Prop2Report r;
    r.criterion = e.criterion_c;
    r.gap = r.criterion + kLog4;
    r.tv_distance = total_variation(p_data.probs(), p_g.probs());
    r.bounded = r.criterion >= -kLog4 - 1e-12;
    r.at_minimum = std::abs(r.gap) <= 1e-12;
    if (r.tv_distance <= 1e-9) {
        r.passed = r.bounded && r.at_minimum;
    } else if (r.tv_distance >= 0.01) {
        r.passed = r.bounded && !r.at_minimum;
    } else {
        r.passed = r.bounded;
    }
    return r;
}

}  // namespace apa

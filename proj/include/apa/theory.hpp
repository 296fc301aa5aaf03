#pragma once

// Finite-support check of the APA minimax game: the closed-form optimal
// discriminator, the value function, and three independent evaluations of the
// generator's virtual training criterion (expectation form, KL form, JS form).
// All logarithms are natural; 0 log 0 is taken as 0.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "apa/rng.hpp"

namespace apa {

class DiscreteDistribution {
public:
    /// Throws std::invalid_argument unless entries are finite, non-negative
    /// and sum to 1 within 1e-12.
    explicit DiscreteDistribution(std::vector<double> probs);

    static DiscreteDistribution uniform(std::size_t n);

    /// Dirichlet(1, ..., 1) draw. Each entry is zeroed with probability
    /// `zero_fraction` (at least one entry always stays positive).
    static DiscreteDistribution random(std::size_t n, Rng& rng, double zero_fraction = 0.0);

    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }

private:
    std::vector<double> probs_;
};

/// Bounds 0 <= alpha < 1; throws std::invalid_argument otherwise.
struct GameParams {
    double alpha = 0.0;
    void validate() const;
};

/// Discriminator values on the union support of p_data and p_g. Points outside
/// the union support are absent.
struct DiscriminatorVector {
    std::vector<std::size_t> support;
    std::vector<double> values;
};

using DiscriminatorFn =
    std::function<DiscriminatorVector(const DiscreteDistribution&, const DiscreteDistribution&, double)>;

/// D*(x) = ((1-a) p_data + a p_g) / ((1-a) p_data + (1+a) p_g)
DiscriminatorVector optimal_discriminator(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g,
                                          double alpha);

/// sum_x [(1-a) p_data log D + a p_g log D + p_g log(1 - D)].
/// Throws std::domain_error when a log argument leaves (0, 1] under nonzero weight.
double value_function(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                      const DiscriminatorVector& d);

double kld(std::span<const double> p, std::span<const double> q);
double jsd(std::span<const double> p, std::span<const double> q);
double entropy(std::span<const double> p);
double total_variation(std::span<const double> p, std::span<const double> q);

inline double kld(const DiscreteDistribution& p, const DiscreteDistribution& q) { return kld(p.probs(), q.probs()); }
inline double jsd(const DiscreteDistribution& p, const DiscreteDistribution& q) { return jsd(p.probs(), q.probs()); }

/// (1 - alpha) p_data + alpha p_g
std::vector<double> smoothed_data(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha);

struct Prop1Report {
    double grid_step = 0.0;
    double max_gap = 0.0;  // max over support of |grid argmax - D*(x)|
    double value_at_optimum = 0.0;
    double value_at_grid = 0.0;
    bool gaps_ok = false;
    bool value_ok = false;
    bool passed = false;
};

/// Per-point grid search of m log y + n log(1 - y) over y in (0, 1), compared
/// with the discriminator produced by `dstar`.
Prop1Report verify_prop1(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                         double grid_step, const DiscriminatorFn& dstar = optimal_discriminator);

struct GameEval {
    double value_v = 0.0;        // value function at D*
    double criterion_c = 0.0;    // expectation form at D*
    double criterion_kld = 0.0;  // -log 4 + two KL terms against the mixture
    double criterion_jsd = 0.0;  // -log 4 + 2 JSD(smoothed data || p_g)
    double kld_data = 0.0;
    double kld_gen = 0.0;
    double jsd_term = 0.0;
    double residual_c_kld = 0.0;
    double residual_c_jsd = 0.0;
    double residual_kld_jsd = 0.0;

    double max_residual() const;
};

GameEval virtual_criterion(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                           const DiscriminatorFn& dstar = optimal_discriminator);

struct Prop2Report {
    double criterion = 0.0;
    double gap = 0.0;  // criterion + log 4
    double tv_distance = 0.0;
    bool bounded = false;     // criterion >= -log 4 - 1e-12
    bool at_minimum = false;  // gap <= 1e-12
    bool passed = false;
};

/// Lower bound always; equality required when TV <= 1e-9 and forbidden when
/// TV >= 0.01. In between, second-order smallness of the JS term makes the
/// 1e-12 test uninformative, so only the bound is checked.
Prop2Report verify_prop2(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                         const DiscriminatorFn& dstar = optimal_discriminator);

}  // namespace apa

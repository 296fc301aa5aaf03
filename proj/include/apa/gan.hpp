#pragma once

// Non-saturating GAN training on 2D toy data with an optional adaptive
// pseudo augmentation controller intercepting the discriminator's real branch.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apa/controller.hpp"
#include "apa/grad.hpp"
#include "apa/logit_stats.hpp"
#include "apa/rng.hpp"
#include "apa/toy_data.hpp"

namespace apa {

enum class BaselineKind { None, InstanceNoise, LabelSmoothing };

std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

/// Conventional discriminator regularizers used as comparison arms.
struct BaselineConfig {
    BaselineKind kind = BaselineKind::None;
    double sigma0 = 0.1;              // instance-noise
    std::int64_t decay_steps = 10'000;  // instance-noise
    double real_target = 0.9;         // label-smoothing

    void validate() const;

    /// sigma0 * max(0, 1 - step / decay_steps); zero unless instance-noise.
    double noise_sigma(std::int64_t step) const;

    /// Target probability for the real term of the discriminator loss.
    double effective_real_target() const;
};

struct GanConfig {
    std::size_t latent_dim = 8;
    std::vector<std::size_t> g_widths{8, 64, 64, 2};
    std::vector<std::size_t> d_widths{2, 64, 64, 1};
    double learning_rate_g = 1e-3;
    double learning_rate_d = 1e-3;
    std::size_t batch_size = 64;
    std::int64_t total_steps = 30'000;
    BaselineConfig baseline;

    void validate() const;
};

/// mean softplus(-real) + mean softplus(fake). With real_target < 1 the real
/// term becomes the cross-entropy against that target.
double d_loss(std::span<const double> real_logits, std::span<const double> fake_logits, double real_target = 1.0);

/// mean softplus(-fake): the non-saturating generator objective.
double g_loss(std::span<const double> fake_logits);

Var d_loss(Tape& tape, Var real_logits, Var fake_logits, double real_target = 1.0);
Var g_loss(Tape& tape, Var fake_logits);

/// Instance noise: adds sigma(step) * N(0, 1) to every coordinate. Always
/// draws batch.size() normals so the stream advances by a fixed amount.
/// Label smoothing leaves inputs alone (it acts in the loss).
/// Throws std::invalid_argument for BaselineKind::None.
Matrix apply_baseline(const Matrix& batch, const BaselineConfig& baseline, std::int64_t step, Rng& rng);

/// What the discriminator sees in one update, plus the clean batches the
/// overfitting statistics are measured on.
struct DiscriminatorBatch {
    Matrix real;    // drawn from the pool, before deception or noise
    Matrix fake;    // generator output, before deception or noise
    DeceptionMasks masks;
    Matrix d_real;  // real-branch input
    Matrix d_fake;  // fake-branch input
    bool altered = false;
};

struct StepRecord {
    LogitBatchStats stats;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double lambda = 0.0;  // heuristic on this batch's signs
    double p = 0.0;       // deception probability after this step
    bool adjusted = false;
};

/// One training run: networks, optimizers, controller and four RNG streams
/// (data, latent, augmentation, init) derived from the run seed.
///
/// Each step() performs exactly one discriminator update then one generator
/// update. The augmentation stream is consumed by a fixed amount per step
/// whether or not APA is enabled, so toggling APA never shifts the data or
/// latent streams.
class Trainer {
public:
    Trainer(GanConfig gan, std::optional<ControllerConfig> apa, std::shared_ptr<const RealPool> pool,
            std::uint64_t seed);

    StepRecord step();

    /// First half of a step: draws the real and fake batches and applies
    /// deception and instance noise. Fresh fakes are plain forward passes, so
    /// nothing drawn here carries gradient to the generator.
    DiscriminatorBatch draw_discriminator_batch();

    /// Discriminator loss gradients for a prepared batch (no update).
    ParameterSet discriminator_gradients(const DiscriminatorBatch& batch) const;

    Matrix generate(std::size_t n, Rng& rng) const;

    const GanConfig& config() const { return gan_; }
    std::int64_t step_count() const { return step_; }
    const DifferentiableNet& generator() const { return generator_; }
    DifferentiableNet& generator() { return generator_; }
    const DifferentiableNet& discriminator() const { return discriminator_; }
    const OptimizerState& generator_optimizer() const { return opt_g_; }
    const OptimizerState& discriminator_optimizer() const { return opt_d_; }
    const std::optional<Controller>& controller() const { return controller_; }
    std::optional<Controller>& controller() { return controller_; }
    const RealPool& pool() const { return *pool_; }
    double p() const { return controller_ ? controller_->p() : 0.0; }

private:
    double update_discriminator(const DiscriminatorBatch& batch, LogitBatchStats& stats);
    double update_generator();

    GanConfig gan_;
    std::optional<Controller> controller_;
    std::shared_ptr<const RealPool> pool_;
    LatentPrior prior_;
    Rng data_rng_;
    Rng latent_rng_;
    Rng aug_rng_;
    Rng init_rng_;
    DifferentiableNet generator_;
    DifferentiableNet discriminator_;
    OptimizerState opt_g_;
    OptimizerState opt_d_;
    std::int64_t step_ = 0;
};

}  // namespace apa

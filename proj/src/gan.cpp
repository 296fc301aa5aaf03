#include "apa/gan.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "apa/errors.hpp"

namespace apa {

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::None:
            return "none";
        case BaselineKind::InstanceNoise:
            return "instance-noise";
        case BaselineKind::LabelSmoothing:
            return "label-smoothing";
    }
    return "unknown";
}

BaselineKind baseline_from_string(const std::string& name) {
    if (name == "none") return BaselineKind::None;
    if (name == "instance-noise") return BaselineKind::InstanceNoise;
    if (name == "label-smoothing") return BaselineKind::LabelSmoothing;
    throw ConfigError("baseline.kind", "unknown baseline '" + name + "' (expected none, instance-noise, label-smoothing)");
}

void BaselineConfig::validate() const {
    if (kind == BaselineKind::InstanceNoise) {
        if (!(sigma0 > 0.0)) throw ConfigError("baseline.sigma0", "must be positive");
        if (decay_steps < 1) throw ConfigError("baseline.decay_steps", "must be positive");
    }
    if (kind == BaselineKind::LabelSmoothing && !(real_target > 0.0 && real_target <= 1.0)) {
        throw ConfigError("baseline.real_target", "must lie in (0, 1]");
    }
}

double BaselineConfig::noise_sigma(std::int64_t step) const {
    if (kind != BaselineKind::InstanceNoise) {
        return 0.0;
    }
    const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
    return sigma0 * std::max(0.0, 1.0 - frac);
}

double BaselineConfig::effective_real_target() const {
    return kind == BaselineKind::LabelSmoothing ? real_target : 1.0;
}

void GanConfig::validate() const {
    if (latent_dim < 1) throw ConfigError("gan.latent_dim", "must be at least 1");
    if (g_widths.size() < 2) throw ConfigError("gan.g_widths", "needs at least two widths");
    if (d_widths.size() < 2) throw ConfigError("gan.d_widths", "needs at least two widths");
    for (auto w : g_widths) {
        if (w == 0) throw ConfigError("gan.g_widths", "widths must be positive");
    }
    for (auto w : d_widths) {
        if (w == 0) throw ConfigError("gan.d_widths", "widths must be positive");
    }
    if (g_widths.front() != latent_dim) throw ConfigError("gan.g_widths", "first width must equal latent_dim");
    if (g_widths.back() != 2) throw ConfigError("gan.g_widths", "must end in 2 (2D data)");
    if (d_widths.front() != 2) throw ConfigError("gan.d_widths", "must start with 2 (2D data)");
    if (d_widths.back() != 1) throw ConfigError("gan.d_widths", "must end in 1 (a raw logit)");
    if (!(learning_rate_g > 0.0)) throw ConfigError("gan.learning_rate_g", "must be positive");
    if (!(learning_rate_d > 0.0)) throw ConfigError("gan.learning_rate_d", "must be positive");
    if (batch_size < 2) throw ConfigError("gan.batch_size", "must be at least 2");
    if (total_steps < 1) throw ConfigError("gan.total_steps", "must be positive");
    baseline.validate();
}

namespace {

double mean_of(std::span<const double> v, double (*f)(double)) {
    double s = 0.0;
    for (double x : v) s += f(x);
    return s / static_cast<double>(v.size());
}

double softplus_neg(double x) {
    return softplus(-x);
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(0, what);
        }
    }
}

}  // namespace

double d_loss(std::span<const double> real_logits, std::span<const double> fake_logits, double real_target) {
    if (real_logits.empty() || fake_logits.empty()) {
        throw std::invalid_argument("d_loss: logit vectors must be non-empty");
    }
    require_finite(real_logits, "real logits");
    require_finite(fake_logits, "fake logits");
    double real_term = mean_of(real_logits, softplus_neg);
    if (real_target != 1.0) {
        real_term = real_target * real_term + (1.0 - real_target) * mean_of(real_logits, softplus);
    }
    return real_term + mean_of(fake_logits, softplus);
}

double g_loss(std::span<const double> fake_logits) {
    if (fake_logits.empty()) {
        throw std::invalid_argument("g_loss: logit vector must be non-empty");
    }
    require_finite(fake_logits, "fake logits");
    return mean_of(fake_logits, softplus_neg);
}

Var d_loss(Tape& tape, Var real_logits, Var fake_logits, double real_target) {
    Var real_term = tape.mean(tape.softplus(tape.neg(real_logits)));
    if (real_target != 1.0) {
        Var other = tape.mean(tape.softplus(real_logits));
        real_term = tape.add(tape.scale(real_term, real_target), tape.scale(other, 1.0 - real_target));
    }
    return tape.add(real_term, tape.mean(tape.softplus(fake_logits)));
}

Var g_loss(Tape& tape, Var fake_logits) {
    return tape.mean(tape.softplus(tape.neg(fake_logits)));
}

Matrix apply_baseline(const Matrix& batch, const BaselineConfig& baseline, std::int64_t step, Rng& rng) {
    if (baseline.kind == BaselineKind::None) {
        throw std::invalid_argument("apply_baseline: no baseline selected");
    }
    if (baseline.kind == BaselineKind::LabelSmoothing) {
        return batch;
    }
    const double sigma = baseline.noise_sigma(step);
    Matrix noise(batch.rows(), batch.cols());
    for (Eigen::Index i = 0; i < noise.rows(); ++i) {
        for (Eigen::Index j = 0; j < noise.cols(); ++j) {
            noise(i, j) = rng.normal();
        }
    }
    if (sigma == 0.0) {
        return batch;
    }
    return batch + sigma * noise;
}

// --- Trainer ------------------------------------------------------------------

Trainer::Trainer(GanConfig gan, std::optional<ControllerConfig> apa, std::shared_ptr<const RealPool> pool,
                 std::uint64_t seed)
    : gan_((gan.validate(), std::move(gan))),
      controller_(apa ? std::optional<Controller>(Controller(*apa)) : std::nullopt),
      pool_(std::move(pool)),
      prior_{gan_.latent_dim},
      data_rng_(Rng::stream(seed, "data")),
      latent_rng_(Rng::stream(seed, "latent")),
      aug_rng_(Rng::stream(seed, "augmentation")),
      init_rng_(Rng::stream(seed, "init")),
      generator_(DifferentiableNet::he_normal(gan_.g_widths, init_rng_)),
      discriminator_(DifferentiableNet::he_normal(gan_.d_widths, init_rng_)),
      opt_g_(OptimizerState::for_net(generator_, gan_.learning_rate_g)),
      opt_d_(OptimizerState::for_net(discriminator_, gan_.learning_rate_d)) {
    if (!pool_) {
        throw std::invalid_argument("Trainer: pool must not be null");
    }
    if (controller_ && static_cast<std::size_t>(controller_->config().batch_size) != gan_.batch_size) {
        throw ConfigError("apa.batch_size", "must equal gan.batch_size");
    }
}

Matrix Trainer::generate(std::size_t n, Rng& rng) const {
    return generator_.forward(sample_latent(prior_, n, rng));
}

DiscriminatorBatch Trainer::draw_discriminator_batch() {
    const std::size_t n = gan_.batch_size;
    DiscriminatorBatch b;
    b.real = sample_real_batch(*pool_, n, data_rng_);
    b.fake = generator_.forward(sample_latent(prior_, n, latent_rng_));

    // Augmentation stream: mask, fresh latents, and (two-sided) a second mask
    // plus pool indices. Drawn every step regardless of p.
    const StrategyKind strategy = controller_ ? controller_->config().strategy : StrategyKind::AdaptiveOneSided;
    const double p = this->p();
    b.masks.real_branch = draw_mask(p, n, aug_rng_);
    const Matrix fresh_latent = sample_latent(prior_, n, aug_rng_);
    Matrix fresh_reals;
    if (strategy == StrategyKind::AdaptiveTwoSided) {
        b.masks.fake_branch = draw_mask(p, n, aug_rng_);
        fresh_reals = gather(*pool_, sample_pool_indices(*pool_, n, aug_rng_));
    }
    Matrix fresh_fakes;
    if (b.masks.real_branch.any()) {
        fresh_fakes = generator_.forward(fresh_latent);
    }
    auto inputs = apply_deception(strategy, b.masks, b.real, fresh_fakes, b.fake, fresh_reals);
    b.d_real = std::move(inputs.real);
    b.d_fake = std::move(inputs.fake);
    b.altered = b.masks.real_branch.any() || b.masks.fake_branch.any();

    if (gan_.baseline.kind == BaselineKind::InstanceNoise) {
        b.d_real = apply_baseline(b.d_real, gan_.baseline, step_, aug_rng_);
        b.d_fake = apply_baseline(b.d_fake, gan_.baseline, step_, aug_rng_);
        b.altered = true;
    }
    return b;
}

ParameterSet Trainer::discriminator_gradients(const DiscriminatorBatch& batch) const {
    Tape tape;
    const NetBinding d = bind(tape, discriminator_, true);
    Var real = forward(tape, d, tape.constant(batch.d_real));
    Var fake = forward(tape, d, tape.constant(batch.d_fake));
    Var loss = d_loss(tape, real, fake, gan_.baseline.effective_real_target());
    tape.backward(loss);
    return gradients(tape, d);
}

double Trainer::update_discriminator(const DiscriminatorBatch& batch, LogitBatchStats& stats) {
    const std::int64_t step_index = step_ + 1;
    Tape tape;
    const NetBinding d = bind(tape, discriminator_, true);
    Var real = forward(tape, d, tape.constant(batch.d_real));
    Var fake = forward(tape, d, tape.constant(batch.d_fake));
    Var loss = d_loss(tape, real, fake, gan_.baseline.effective_real_target());
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value)) {
        throw NonFiniteError(step_index, "discriminator loss");
    }

    // Overfitting statistics use the clean batches, measured before the update.
    if (batch.altered) {
        const Matrix real_logits = discriminator_.forward(batch.real);
        const Matrix fake_logits = discriminator_.forward(batch.fake);
        stats = summarize_logits(step_index, {real_logits.data(), static_cast<std::size_t>(real_logits.size())},
                                 {fake_logits.data(), static_cast<std::size_t>(fake_logits.size())});
    } else {
        const Matrix& real_logits = tape.value(real);
        const Matrix& fake_logits = tape.value(fake);
        stats = summarize_logits(step_index, {real_logits.data(), static_cast<std::size_t>(real_logits.size())},
                                 {fake_logits.data(), static_cast<std::size_t>(fake_logits.size())});
    }

    tape.backward(loss);
    adam_step(discriminator_, gradients(tape, d), opt_d_);
    step_ = step_index;
    return loss_value;
}

double Trainer::update_generator() {
    const Matrix z = sample_latent(prior_, gan_.batch_size, latent_rng_);
    Tape tape;
    const NetBinding g = bind(tape, generator_, true);
    const NetBinding d = bind(tape, discriminator_, false);
    Var x = forward(tape, g, tape.constant(z));
    if (gan_.baseline.kind == BaselineKind::InstanceNoise) {
        const Matrix clean = tape.value(x);
        const Matrix noisy = apply_baseline(clean, gan_.baseline, step_ - 1, aug_rng_);
        x = tape.add(x, tape.constant(noisy - clean));
    }
    Var logits = forward(tape, d, x);
    Var loss = g_loss(tape, logits);
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value)) {
        throw NonFiniteError(step_, "generator loss");
    }
    tape.backward(loss);
    adam_step(generator_, gradients(tape, g), opt_g_);
    return loss_value;
}

StepRecord Trainer::step() {
    StepRecord rec;
    const DiscriminatorBatch batch = draw_discriminator_batch();
    rec.d_loss = update_discriminator(batch, rec.stats);
    rec.g_loss = update_generator();

    const HeuristicKind kind = controller_ ? controller_->config().heuristic : HeuristicKind::LambdaR;
    rec.lambda = compute_lambda(kind, rec.stats.mean_sign_real, rec.stats.mean_sign_fake);
    if (controller_) {
        rec.adjusted = controller_->update(rec.stats, rec.stats.step);
    }
    rec.p = p();
    return rec;
}

}  // namespace apa

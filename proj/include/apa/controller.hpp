#pragma once

// Adaptive pseudo augmentation control: overfitting heuristics from the signs
// of raw discriminator logits, the deception probability schedule, and the
// per-sample substitution of generated samples into the discriminator batch.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apa/grad.hpp"
#include "apa/logit_stats.hpp"
#include "apa/rng.hpp"

namespace apa {

enum class HeuristicKind { LambdaR, LambdaF, LambdaRF };

std::string to_string(HeuristicKind kind);
HeuristicKind heuristic_from_string(const std::string& name);

enum class StrategyKind { AdaptiveOneSided, AdaptiveTwoSided, Fixed };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

struct ControllerConfig {
    HeuristicKind heuristic = HeuristicKind::LambdaR;
    double threshold = 0.6;
    std::int64_t adjust_every = 4;
    std::int64_t ramp_images = 500'000;
    StrategyKind strategy = StrategyKind::AdaptiveOneSided;
    double p_fixed = 0.5;  // only read by StrategyKind::Fixed
    std::int64_t batch_size = 64;

    void validate() const;

    /// Size of one adjustment: p moves from 0 to 1 after ramp_images real
    /// images have been shown at one step per adjust_every iterations.
    double step_size() const;

    bool two_sided() const { return strategy == StrategyKind::AdaptiveTwoSided; }
};

struct PHistoryEntry {
    std::int64_t step = 0;
    double p = 0.0;
    double lambda = 0.0;
};

/// Deception probability and the sign-mean window since the last adjustment.
///
/// p is kept as base + level * step_size so that a run of k upward
/// adjustments from zero gives exactly k * step_size. Clamping at zero
/// resets both base and level.
struct ControllerState {
    double p = 0.0;
    double p_base = 0.0;
    std::int64_t p_level = 0;
    double sign_real_sum = 0.0;
    double sign_fake_sum = 0.0;
    std::int64_t observed_batches = 0;
    std::int64_t iterations_since_adjust = 0;
    std::vector<PHistoryEntry> p_history;

    static ControllerState initial(const ControllerConfig& config);
    static ControllerState starting_at(double p);
};

/// lambda_r = E sign(D_real), lambda_f = -E sign(D_fake),
/// lambda_rf = (E sign(D_real) - E sign(D_fake)) / 2.
/// Throws std::invalid_argument for sign means outside [-1, 1].
double compute_lambda(HeuristicKind kind, double mean_sign_real, double mean_sign_fake);

void observe(ControllerState& state, const LogitBatchStats& stats);

/// Windowed sign means and the heuristic over the current window.
/// Throws std::logic_error on an empty window.
double window_lambda(const ControllerState& state, HeuristicKind kind);

/// Counts one training iteration and, on every adjust_every-th call, moves p
/// one step toward the threshold, clamps it at zero, logs (step, p, lambda),
/// and clears the window. Returns true when an adjustment happened.
/// Under a fixed strategy p is left alone and only lambda is logged.
bool maybe_adjust(ControllerState& state, const ControllerConfig& config, std::int64_t step);

struct DeceptionMask {
    std::vector<bool> flags;

    std::size_t count() const;
    bool any() const { return count() > 0; }
};

/// Independent Bernoulli(min(p, 1)) flags. Always consumes exactly
/// batch_size uniforms from `rng`.
DeceptionMask draw_mask(double p, std::size_t batch_size, Rng& rng);

struct DeceptionMasks {
    DeceptionMask real_branch;
    DeceptionMask fake_branch;  // empty unless two-sided
};

struct DiscriminatorInputs {
    Matrix real;
    Matrix fake;
};

/// Builds the discriminator's real-branch and fake-branch inputs.
///
/// One-sided: flagged rows of the real batch are replaced by fresh generated
/// samples. Two-sided additionally replaces flagged rows of the fake batch by
/// fresh pool samples. Loss roles are not touched.
/// `fresh_fakes` / `fresh_reals` may be empty when no flag selects them.
DiscriminatorInputs apply_deception(StrategyKind strategy, const DeceptionMasks& masks, const Matrix& real_batch,
                                    const Matrix& fresh_fakes, const Matrix& fake_batch, const Matrix& fresh_reals);

/// Owns a config and state for one training run.
class Controller {
public:
    explicit Controller(ControllerConfig config);

    const ControllerConfig& config() const { return config_; }
    const ControllerState& state() const { return state_; }
    ControllerState& state() { return state_; }

    double p() const { return state_.p; }

    /// observe() followed by maybe_adjust().
    bool update(const LogitBatchStats& stats, std::int64_t step);

private:
    ControllerConfig config_;
    ControllerState state_;
};

}  // namespace apa

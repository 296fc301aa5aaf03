#include "apa/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apa/errors.hpp"

namespace apa {

double mean_sign(std::span<const double> logits) {
    if (logits.empty()) {
        throw std::invalid_argument("mean_sign: empty logit vector");
    }
    double s = 0.0;
    for (double v : logits) {
        s += (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    return s / static_cast<double>(logits.size());
}

LogitBatchStats summarize_logits(std::int64_t step, std::span<const double> real_logits,
                                 std::span<const double> fake_logits) {
    if (real_logits.empty() || fake_logits.empty()) {
        throw std::invalid_argument("summarize_logits: empty logit vector");
    }
    auto mean = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    LogitBatchStats st;
    st.step = step;
    st.mean_real_logit = mean(real_logits);
    st.mean_fake_logit = mean(fake_logits);
    st.mean_sign_real = mean_sign(real_logits);
    st.mean_sign_fake = mean_sign(fake_logits);
    st.batch_size = real_logits.size();
    return st;
}

std::string to_string(HeuristicKind kind) {
    switch (kind) {
        case HeuristicKind::LambdaR:
            return "lambda_r";
        case HeuristicKind::LambdaF:
            return "lambda_f";
        case HeuristicKind::LambdaRF:
            return "lambda_rf";
    }
    return "unknown";
}

HeuristicKind heuristic_from_string(const std::string& name) {
    if (name == "lambda_r") return HeuristicKind::LambdaR;
    if (name == "lambda_f") return HeuristicKind::LambdaF;
    if (name == "lambda_rf") return HeuristicKind::LambdaRF;
    throw ConfigError("apa.heuristic", "unknown heuristic '" + name + "' (expected lambda_r, lambda_f, lambda_rf)");
}

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::AdaptiveOneSided:
            return "adaptive-one-sided";
        case StrategyKind::AdaptiveTwoSided:
            return "adaptive-two-sided";
        case StrategyKind::Fixed:
            return "fixed";
    }
    return "unknown";
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "adaptive-one-sided") return StrategyKind::AdaptiveOneSided;
    if (name == "adaptive-two-sided") return StrategyKind::AdaptiveTwoSided;
    if (name == "fixed") return StrategyKind::Fixed;
    throw ConfigError("apa.strategy",
                      "unknown strategy '" + name + "' (expected adaptive-one-sided, adaptive-two-sided, fixed)");
}

void ControllerConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("apa.threshold", "must lie strictly between 0 and 1");
    }
    if (adjust_every < 1) {
        throw ConfigError("apa.adjust_every", "must be a positive number of iterations");
    }
    if (batch_size < 1) {
        throw ConfigError("apa.batch_size", "must be positive");
    }
    if (ramp_images < adjust_every * batch_size) {
        throw ConfigError("apa.ramp_images", "must be at least adjust_every * batch_size");
    }
    if (strategy == StrategyKind::Fixed && !(p_fixed >= 0.0 && std::isfinite(p_fixed))) {
        throw ConfigError("apa.p_fixed", "must be a finite non-negative probability");
    }
}

double ControllerConfig::step_size() const {
    return static_cast<double>(adjust_every * batch_size) / static_cast<double>(ramp_images);
}

ControllerState ControllerState::initial(const ControllerConfig& config) {
    return starting_at(config.strategy == StrategyKind::Fixed ? config.p_fixed : 0.0);
}

ControllerState ControllerState::starting_at(double p) {
    ControllerState s;
    s.p = p;
    s.p_base = p;
    return s;
}

double compute_lambda(HeuristicKind kind, double mean_sign_real, double mean_sign_fake) {
    auto in_range = [](double v) { return v >= -1.0 && v <= 1.0; };
    if (!in_range(mean_sign_real) || !in_range(mean_sign_fake)) {
        throw std::invalid_argument("compute_lambda: sign means must lie in [-1, 1]");
    }
    switch (kind) {
        case HeuristicKind::LambdaR:
            return mean_sign_real;
        case HeuristicKind::LambdaF:
            return -mean_sign_fake;
        case HeuristicKind::LambdaRF:
            return (mean_sign_real - mean_sign_fake) / 2.0;
    }
    return 0.0;
}

void observe(ControllerState& state, const LogitBatchStats& stats) {
    state.sign_real_sum += stats.mean_sign_real;
    state.sign_fake_sum += stats.mean_sign_fake;
    ++state.observed_batches;
}

double window_lambda(const ControllerState& state, HeuristicKind kind) {
    if (state.observed_batches == 0) {
        throw std::logic_error("controller adjustment with an empty observation window");
    }
    const double n = static_cast<double>(state.observed_batches);
    // Clamp guards against accumulated rounding nudging a mean past +-1.
    const double real = std::clamp(state.sign_real_sum / n, -1.0, 1.0);
    const double fake = std::clamp(state.sign_fake_sum / n, -1.0, 1.0);
    return compute_lambda(kind, real, fake);
}

bool maybe_adjust(ControllerState& state, const ControllerConfig& config, std::int64_t step) {
    if (state.iterations_since_adjust + 1 < config.adjust_every) {
        ++state.iterations_since_adjust;
        return false;
    }
    const double lambda = window_lambda(state, config.heuristic);

    if (config.strategy != StrategyKind::Fixed) {
        if (lambda > config.threshold) {
            ++state.p_level;
        } else if (lambda < config.threshold) {
            --state.p_level;
        }
        const double candidate = state.p_base + static_cast<double>(state.p_level) * config.step_size();
        if (candidate < 0.0) {
            state.p_base = 0.0;
            state.p_level = 0;
            state.p = 0.0;
        } else {
            state.p = candidate;
        }
    }

    state.p_history.push_back({step, state.p, lambda});
    state.sign_real_sum = 0.0;
    state.sign_fake_sum = 0.0;
    state.observed_batches = 0;
    state.iterations_since_adjust = 0;
    return true;
}

std::size_t DeceptionMask::count() const {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

DeceptionMask draw_mask(double p, std::size_t batch_size, Rng& rng) {
    if (!(p >= 0.0)) {
        throw std::invalid_argument("draw_mask: p must be non-negative");
    }
    const double prob = std::min(p, 1.0);
    DeceptionMask mask;
    mask.flags.resize(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        mask.flags[i] = rng.uniform() < prob;
    }
    return mask;
}

namespace {

void substitute(Matrix& target, const DeceptionMask& mask, const Matrix& source, const char* what) {
    if (mask.flags.size() != static_cast<std::size_t>(target.rows())) {
        throw ShapeError(std::string("apply_deception: ") + what + " mask length " +
                         std::to_string(mask.flags.size()) + " does not match batch size " +
                         std::to_string(target.rows()));
    }
    if (!mask.any()) {
        return;
    }
    if (source.rows() != target.rows() || source.cols() != target.cols()) {
        throw ShapeError(std::string("apply_deception: ") + what + " replacement batch has the wrong shape");
    }
    for (std::size_t i = 0; i < mask.flags.size(); ++i) {
        if (mask.flags[i]) {
            const auto r = static_cast<Eigen::Index>(i);
            target.row(r) = source.row(r);
        }
    }
}

}  // namespace

DiscriminatorInputs apply_deception(StrategyKind strategy, const DeceptionMasks& masks, const Matrix& real_batch,
                                    const Matrix& fresh_fakes, const Matrix& fake_batch, const Matrix& fresh_reals) {
    DiscriminatorInputs out{real_batch, fake_batch};
    substitute(out.real, masks.real_branch, fresh_fakes, "real-branch");
    if (strategy == StrategyKind::AdaptiveTwoSided) {
        substitute(out.fake, masks.fake_branch, fresh_reals, "fake-branch");
    }
    return out;
}

Controller::Controller(ControllerConfig config) : config_(config), state_(ControllerState::initial(config)) {
    config_.validate();
}

bool Controller::update(const LogitBatchStats& stats, std::int64_t step) {
    observe(state_, stats);
    return maybe_adjust(state_, config_, step);
}

}  // namespace apa

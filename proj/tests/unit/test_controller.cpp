#include <cmath>

#include "doctest.h"

#include "apa/controller.hpp"

using namespace apa;

namespace {

LogitBatchStats signs(double real, double fake) {
    LogitBatchStats s;
    s.mean_sign_real = real;
    s.mean_sign_fake = fake;
    s.batch_size = 64;
    return s;
}

// Drives one adjustment window with constant sign means.
void run_window(ControllerState& st, const ControllerConfig& cfg, double real, double fake, std::int64_t& step) {
    for (std::int64_t i = 0; i < cfg.adjust_every; ++i) {
        observe(st, signs(real, fake));
        maybe_adjust(st, cfg, ++step);
    }
}

}  // namespace

TEST_CASE("heuristic reference values") {
    CHECK(compute_lambda(HeuristicKind::LambdaR, 1, -1) == 1.0);
    CHECK(compute_lambda(HeuristicKind::LambdaF, 1, -1) == 1.0);
    CHECK(compute_lambda(HeuristicKind::LambdaRF, 1, -1) == 1.0);
    for (auto k : {HeuristicKind::LambdaR, HeuristicKind::LambdaF, HeuristicKind::LambdaRF}) {
        CHECK(compute_lambda(k, 0, 0) == 0.0);
    }
    CHECK(compute_lambda(HeuristicKind::LambdaR, 0.5, -0.25) == 0.5);
    CHECK(compute_lambda(HeuristicKind::LambdaF, 0.5, -0.25) == 0.25);
    CHECK(compute_lambda(HeuristicKind::LambdaRF, 0.5, -0.25) == 0.375);
    CHECK_THROWS_AS(compute_lambda(HeuristicKind::LambdaR, 1.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(compute_lambda(HeuristicKind::LambdaR, 0, -1.01), std::invalid_argument);
}

TEST_CASE("property: lambda_rf is the mean of lambda_r and lambda_f, all in [-1, 1]") {
    Rng rng(8);
    for (int i = 0; i < 10'000; ++i) {
        const double r = 2.0 * rng.uniform() - 1.0;
        const double f = 2.0 * rng.uniform() - 1.0;
        const double lr = compute_lambda(HeuristicKind::LambdaR, r, f);
        const double lf = compute_lambda(HeuristicKind::LambdaF, r, f);
        const double lrf = compute_lambda(HeuristicKind::LambdaRF, r, f);
        CHECK(lrf == doctest::Approx((lr + lf) / 2.0).epsilon(1e-15));
        for (double l : {lr, lf, lrf}) {
            CHECK(l >= -1.0);
            CHECK(l <= 1.0);
        }
    }
}

TEST_CASE("mean_sign treats zero as zero") {
    const std::vector<double> logits{2.0, 0.0, -1.0, 0.0};
    CHECK(mean_sign(logits) == 0.0);
    const std::vector<double> pos{0.0, 0.0, 5.0};
    CHECK(mean_sign(pos) == doctest::Approx(1.0 / 3.0));
    const auto stats = summarize_logits(3, std::vector<double>{1.0, 3.0}, std::vector<double>{-2.0, 0.0, -4.0});
    CHECK(stats.step == 3);
    CHECK(stats.mean_real_logit == 2.0);
    CHECK(stats.mean_fake_logit == -2.0);
    CHECK(stats.mean_sign_real == 1.0);
    CHECK(stats.mean_sign_fake == doctest::Approx(-2.0 / 3.0));
}

TEST_CASE("step size from the ramp rule") {
    ControllerConfig cfg;
    CHECK(cfg.step_size() == 256.0 / 500'000.0);
    CHECK(cfg.step_size() == doctest::Approx(0.000512).epsilon(1e-15));
}

TEST_CASE("windowed sign means average the observations") {
    ControllerConfig cfg;
    auto st = ControllerState::initial(cfg);
    observe(st, signs(0.4, 0.0));
    observe(st, signs(0.6, 0.0));
    CHECK(window_lambda(st, HeuristicKind::LambdaR) == doctest::Approx(0.5).epsilon(1e-15));
    auto empty = ControllerState::initial(cfg);
    CHECK_THROWS_AS(window_lambda(empty, HeuristicKind::LambdaR), std::logic_error);
}

TEST_CASE("adjustment above threshold from p = 0.01") {
    ControllerConfig cfg;
    auto st = ControllerState::starting_at(0.01);
    std::int64_t step = 0;
    run_window(st, cfg, 0.7, 0.0, step);
    CHECK(st.p == doctest::Approx(0.010512).epsilon(1e-15));
    REQUIRE(st.p_history.size() == 1);
    CHECK(st.p_history[0].step == 4);
    CHECK(st.p_history[0].lambda == doctest::Approx(0.7));
}

TEST_CASE("p clamps at zero") {
    ControllerConfig cfg;
    auto st = ControllerState::starting_at(0.0002);
    std::int64_t step = 0;
    run_window(st, cfg, 0.1, 0.0, step);
    CHECK(st.p == 0.0);
    run_window(st, cfg, 0.1, 0.0, step);
    CHECK(st.p == 0.0);
    run_window(st, cfg, 0.9, 0.0, step);
    CHECK(st.p == cfg.step_size());
}

TEST_CASE("lambda equal to the threshold leaves p alone") {
    ControllerConfig cfg;
    cfg.threshold = 0.5;
    auto st = ControllerState::starting_at(0.25);
    std::int64_t step = 0;
    run_window(st, cfg, 0.5, 0.0, step);
    CHECK(st.p == 0.25);
    CHECK(st.p_history.size() == 1);
}

TEST_CASE("p changes only at adjustment boundaries") {
    ControllerConfig cfg;
    auto st = ControllerState::initial(cfg);
    for (std::int64_t s = 1; s <= 40; ++s) {
        observe(st, signs(1.0, -1.0));
        const double before = st.p;
        const bool adjusted = maybe_adjust(st, cfg, s);
        CHECK(adjusted == (s % 4 == 0));
        if (!adjusted) CHECK(st.p == before);
        if (adjusted) CHECK(std::abs(st.p - before) == doctest::Approx(cfg.step_size()).epsilon(1e-12));
    }
    CHECK(st.p == 10 * cfg.step_size());
}

TEST_CASE("property: k adjustments above threshold from zero give exactly k steps") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        ControllerConfig cfg;
        cfg.adjust_every = 1 + static_cast<std::int64_t>(rng.index(6));
        cfg.batch_size = 2 + static_cast<std::int64_t>(rng.index(100));
        cfg.threshold = 0.1 + 0.8 * rng.uniform();
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng.index(3000));
        auto st = ControllerState::initial(cfg);
        std::int64_t step = 0;
        for (std::int64_t i = 0; i < k; ++i) run_window(st, cfg, 1.0, 0.0, step);
        CHECK(st.p == static_cast<double>(k) * cfg.step_size());
        CHECK(st.p_history.size() == static_cast<std::size_t>(k));
    }
}

TEST_CASE("sustained complete overfitting reaches one after ramp_images") {
    ControllerConfig cfg;
    auto st = ControllerState::initial(cfg);
    std::int64_t step = 0;
    const std::int64_t windows = cfg.ramp_images / (cfg.adjust_every * cfg.batch_size);
    // 500,000 / 256 = 1953.125 windows: p sits just below one after 1953
    // adjustments and passes it on the next
    for (std::int64_t i = 0; i < windows; ++i) run_window(st, cfg, 1.0, -1.0, step);
    CHECK(windows == 1953);
    CHECK(st.p < 1.0);
    CHECK(st.p == 1953 * cfg.step_size());
    run_window(st, cfg, 1.0, -1.0, step);
    CHECK(st.p > 1.0);
}

TEST_CASE("property: random lambda sequences follow a counting oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        ControllerConfig cfg;
        auto st = ControllerState::initial(cfg);
        std::int64_t level = 0;
        std::int64_t step = 0;
        for (int w = 0; w < 200; ++w) {
            const double lam = rng.uniform();
            run_window(st, cfg, lam, 0.0, step);
            if (lam > cfg.threshold) ++level;
            if (lam < cfg.threshold) level = std::max<std::int64_t>(0, level - 1);
            CHECK(st.p >= 0.0);
            CHECK(st.p == static_cast<double>(level) * cfg.step_size());
        }
    }
}

TEST_CASE("fixed strategy holds p and only logs lambda") {
    ControllerConfig cfg;
    cfg.strategy = StrategyKind::Fixed;
    cfg.p_fixed = 0.5;
    auto st = ControllerState::initial(cfg);
    CHECK(st.p == 0.5);
    std::int64_t step = 0;
    for (int w = 0; w < 25; ++w) run_window(st, cfg, w % 2 ? 1.0 : -1.0, 0.0, step);
    CHECK(st.p == 0.5);
    REQUIRE(st.p_history.size() == 25);
    for (const auto& e : st.p_history) CHECK(e.p == 0.5);
    CHECK(st.p_history[1].lambda == 1.0);
}

TEST_CASE("controller config validation") {
    ControllerConfig cfg;
    cfg.threshold = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.ramp_images = 100;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.adjust_every = 0;
    CHECK_THROWS(cfg.validate());
    CHECK_THROWS(heuristic_from_string("lambda_x"));
    CHECK(heuristic_from_string("lambda_rf") == HeuristicKind::LambdaRF);
    CHECK(strategy_from_string("adaptive-two-sided") == StrategyKind::AdaptiveTwoSided);
}

TEST_CASE("mask extremes") {
    Rng rng(1);
    CHECK(draw_mask(0.0, 64, rng).count() == 0);
    CHECK(draw_mask(1.0, 64, rng).count() == 64);
    CHECK(draw_mask(3.7, 64, rng).count() == 64);
    CHECK_THROWS_AS(draw_mask(-0.1, 4, rng), std::invalid_argument);
}

TEST_CASE("mask true fraction follows the binomial") {
    Rng rng = Rng::stream(1, "augmentation");
    const std::size_t n = 100'000;
    const auto m = draw_mask(0.3, n, rng);
    const double sd = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(m.count()) - 0.3 * n) <= 3.0 * sd);
}

TEST_CASE("mask always consumes the same number of draws") {
    Rng a(7), b(7);
    draw_mask(0.0, 64, a);
    draw_mask(0.9, 64, b);
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("deception by substitution") {
    Matrix real = Matrix::Constant(4, 2, 1.0);
    Matrix fresh_fake = Matrix::Constant(4, 2, 2.0);
    Matrix fake = Matrix::Constant(4, 2, 3.0);
    Matrix fresh_real = Matrix::Constant(4, 2, 4.0);
    DeceptionMasks none{{std::vector<bool>(4, false)}, {std::vector<bool>(4, false)}};
    DeceptionMasks all{{std::vector<bool>(4, true)}, {std::vector<bool>(4, true)}};

    auto out = apply_deception(StrategyKind::AdaptiveOneSided, none, real, fresh_fake, fake, fresh_real);
    CHECK(out.real == real);
    CHECK(out.fake == fake);

    out = apply_deception(StrategyKind::AdaptiveOneSided, all, real, fresh_fake, fake, fresh_real);
    CHECK(out.real == fresh_fake);
    CHECK(out.fake == fake);

    out = apply_deception(StrategyKind::AdaptiveTwoSided, all, real, fresh_fake, fake, fresh_real);
    CHECK(out.real == fresh_fake);
    CHECK(out.fake == fresh_real);

    DeceptionMasks some{{{true, false, false, true}}, {}};
    out = apply_deception(StrategyKind::AdaptiveOneSided, some, real, fresh_fake, fake, fresh_real);
    CHECK(out.real(0, 0) == 2.0);
    CHECK(out.real(1, 0) == 1.0);
    CHECK(out.real(3, 1) == 2.0);

    DeceptionMasks short_mask{{{true, false}}, {}};
    CHECK_THROWS(apply_deception(StrategyKind::AdaptiveOneSided, short_mask, real, fresh_fake, fake, fresh_real));
}

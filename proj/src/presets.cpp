#include "apa/presets.hpp"

#include "apa/errors.hpp"

namespace apa {

namespace {

constexpr std::size_t kLimitedPool = 128;
constexpr std::size_t kAmplePool = 50'000;

ExperimentConfig base(const std::string& name, std::size_t pool_size) {
    ExperimentConfig c;
    c.name = name;
    c.dataset.spec = DatasetSpec::ring(8, 2.0, 0.02);
    c.dataset.pool_size = pool_size;
    c.dataset.pool_seed = 1;
    c.seeds = {1, 2, 3, 4, 5};
    return c;
}

ControllerConfig apa_defaults() {
    ControllerConfig cc;
    cc.batch_size = 64;
    return cc;
}

ExperimentConfig with_apa(ExperimentConfig c, ControllerConfig cc) {
    cc.batch_size = static_cast<std::int64_t>(c.gan.batch_size);
    c.apa = cc;
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {
        "baseline-limited",
        "apa-limited",
        "baseline-ample",
        "apa-ample",
        "ablation-lambda-f",
        "ablation-lambda-rf",
        "ablation-fixed-p0.5",
        "ablation-two-sided",
        "ablation-t0.4",
        "ablation-t0.6",
        "ablation-t0.8",
        "instance-noise",
        "label-smoothing-0.9",
    };
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "baseline-limited") {
        c = base(name, kLimitedPool);
    } else if (name == "apa-limited") {
        c = with_apa(base(name, kLimitedPool), apa_defaults());
    } else if (name == "baseline-ample") {
        c = base(name, kAmplePool);
    } else if (name == "apa-ample") {
        c = with_apa(base(name, kAmplePool), apa_defaults());
    } else if (name == "ablation-lambda-f") {
        auto cc = apa_defaults();
        cc.heuristic = HeuristicKind::LambdaF;
        c = with_apa(base(name, kLimitedPool), cc);
    } else if (name == "ablation-lambda-rf") {
        auto cc = apa_defaults();
        cc.heuristic = HeuristicKind::LambdaRF;
        c = with_apa(base(name, kLimitedPool), cc);
    } else if (name == "ablation-fixed-p0.5") {
        auto cc = apa_defaults();
        cc.strategy = StrategyKind::Fixed;
        cc.p_fixed = 0.5;
        c = with_apa(base(name, kLimitedPool), cc);
    } else if (name == "ablation-two-sided") {
        auto cc = apa_defaults();
        cc.strategy = StrategyKind::AdaptiveTwoSided;
        c = with_apa(base(name, kLimitedPool), cc);
    } else if (name == "ablation-t0.4" || name == "ablation-t0.6" || name == "ablation-t0.8") {
        auto cc = apa_defaults();
        cc.threshold = name == "ablation-t0.4" ? 0.4 : (name == "ablation-t0.6" ? 0.6 : 0.8);
        c = with_apa(base(name, kLimitedPool), cc);
    } else if (name == "instance-noise") {
        c = base(name, kLimitedPool);
        c.gan.baseline.kind = BaselineKind::InstanceNoise;
        c.gan.baseline.sigma0 = 0.1;
        c.gan.baseline.decay_steps = 15'000;
    } else if (name == "label-smoothing-0.9") {
        c = base(name, kLimitedPool);
        c.gan.baseline.kind = BaselineKind::LabelSmoothing;
        c.gan.baseline.real_target = 0.9;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    c.validate();
    return c;
}

}  // namespace apa

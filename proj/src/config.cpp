#include "apa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "apa/errors.hpp"

namespace apa {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(join(prefix, key), "unknown key");
        }
    }
}

template <typename T>
void read(const json& obj, const std::string& prefix, const std::string& key, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    const std::string field = join(prefix, key);
    if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(field, "expected a string");
        out = it->template get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError(field, "expected a number");
        out = it->template get<double>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(field, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (it->is_number_unsigned() || it->template get<std::int64_t>() >= 0) {
                out = it->template get<T>();
            } else {
                throw ConfigError(field, "expected a non-negative integer");
            }
        } else {
            out = it->template get<T>();
        }
    } else {
        static_assert(sizeof(T) == 0, "unsupported config field type");
    }
}

void read_widths(const json& obj, const std::string& prefix, const std::string& key, std::vector<std::size_t>& out) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    const std::string field = join(prefix, key);
    if (!it->is_array()) throw ConfigError(field, "expected an array of positive integers");
    std::vector<std::size_t> widths;
    for (const auto& v : *it) {
        if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
            throw ConfigError(field, "expected an array of positive integers");
        }
        widths.push_back(v.get<std::size_t>());
    }
    out = std::move(widths);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("name", "must not be empty");
    dataset.spec.validate();
    if (dataset.pool_size < 2) throw ConfigError("dataset.pool_size", "must be at least 2");
    gan.validate();
    if (apa) {
        apa->validate();
        if (static_cast<std::size_t>(apa->batch_size) != gan.batch_size) {
            throw ConfigError("apa.batch_size", "must equal gan.batch_size");
        }
    }
    if (eval_every < 1) throw ConfigError("eval_every", "must be positive");
    if (gan.total_steps % eval_every != 0) throw ConfigError("eval_every", "must divide gan.total_steps");
    if (eval.samples < 3) throw ConfigError("eval.samples", "must be at least 3");
    if (!(eval.capture_radius_stds > 0.0)) throw ConfigError("eval.capture_radius_stds", "must be positive");
    if (eval.hist_bins < 1) throw ConfigError("eval.hist_bins", "must be positive");
    if (eval.final_window < 1) throw ConfigError("eval.final_window", "must be positive");
    if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, "", {"name", "dataset", "gan", "apa", "baseline", "eval_every", "eval", "seeds", "output_dir"});
    ExperimentConfig c;
    read(j, "", "name", c.name);

    if (auto it = j.find("dataset"); it != j.end()) {
        const json& d = *it;
        reject_unknown(d, "dataset",
                       {"family", "mode_count", "mode_std", "radius", "spacing", "noise_std", "pool_size", "pool_seed"});
        std::string family = to_string(c.dataset.spec.family);
        read(d, "dataset", "family", family);
        c.dataset.spec.family = dataset_family_from_string(family);
        read(d, "dataset", "mode_count", c.dataset.spec.mode_count);
        read(d, "dataset", "mode_std", c.dataset.spec.mode_std);
        read(d, "dataset", "radius", c.dataset.spec.radius);
        read(d, "dataset", "spacing", c.dataset.spec.spacing);
        read(d, "dataset", "noise_std", c.dataset.spec.noise_std);
        read(d, "dataset", "pool_size", c.dataset.pool_size);
        read(d, "dataset", "pool_seed", c.dataset.pool_seed);
    }

    if (auto it = j.find("gan"); it != j.end()) {
        const json& g = *it;
        reject_unknown(g, "gan",
                       {"latent_dim", "g_widths", "d_widths", "learning_rate_g", "learning_rate_d", "batch_size",
                        "total_steps"});
        read(g, "gan", "latent_dim", c.gan.latent_dim);
        read_widths(g, "gan", "g_widths", c.gan.g_widths);
        read_widths(g, "gan", "d_widths", c.gan.d_widths);
        read(g, "gan", "learning_rate_g", c.gan.learning_rate_g);
        read(g, "gan", "learning_rate_d", c.gan.learning_rate_d);
        read(g, "gan", "batch_size", c.gan.batch_size);
        read(g, "gan", "total_steps", c.gan.total_steps);
    }

    if (auto it = j.find("baseline"); it != j.end()) {
        const json& b = *it;
        reject_unknown(b, "baseline", {"kind", "sigma0", "decay_steps", "real_target"});
        std::string kind = "none";
        read(b, "baseline", "kind", kind);
        c.gan.baseline.kind = baseline_from_string(kind);
        read(b, "baseline", "sigma0", c.gan.baseline.sigma0);
        read(b, "baseline", "decay_steps", c.gan.baseline.decay_steps);
        read(b, "baseline", "real_target", c.gan.baseline.real_target);
    }

    if (auto it = j.find("apa"); it != j.end() && !it->is_null()) {
        const json& a = *it;
        reject_unknown(a, "apa", {"heuristic", "threshold", "adjust_every", "ramp_images", "strategy", "p_fixed"});
        ControllerConfig cc;
        std::string heuristic = to_string(cc.heuristic);
        std::string strategy = to_string(cc.strategy);
        read(a, "apa", "heuristic", heuristic);
        read(a, "apa", "strategy", strategy);
        cc.heuristic = heuristic_from_string(heuristic);
        cc.strategy = strategy_from_string(strategy);
        read(a, "apa", "threshold", cc.threshold);
        read(a, "apa", "adjust_every", cc.adjust_every);
        read(a, "apa", "ramp_images", cc.ramp_images);
        read(a, "apa", "p_fixed", cc.p_fixed);
        c.apa = cc;
    }

    read(j, "", "eval_every", c.eval_every);
    if (auto it = j.find("eval"); it != j.end()) {
        const json& e = *it;
        reject_unknown(e, "eval", {"samples", "capture_radius_stds", "hit_threshold", "hist_bins", "final_window"});
        read(e, "eval", "samples", c.eval.samples);
        read(e, "eval", "capture_radius_stds", c.eval.capture_radius_stds);
        read(e, "eval", "hit_threshold", c.eval.hit_threshold);
        read(e, "eval", "hist_bins", c.eval.hist_bins);
        read(e, "eval", "final_window", c.eval.final_window);
    }

    if (auto it = j.find("seeds"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("seeds", "expected an array of non-negative integers");
        c.seeds.clear();
        for (const auto& s : *it) {
            if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
                throw ConfigError("seeds", "expected an array of non-negative integers");
            }
            c.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    read(j, "", "output_dir", c.output_dir);

    if (c.apa) {
        c.apa->batch_size = static_cast<std::int64_t>(c.gan.batch_size);
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["dataset"] = {
        {"family", to_string(c.dataset.spec.family)},
        {"mode_count", c.dataset.spec.mode_count},
        {"mode_std", c.dataset.spec.mode_std},
        {"radius", c.dataset.spec.radius},
        {"spacing", c.dataset.spec.spacing},
        {"noise_std", c.dataset.spec.noise_std},
        {"pool_size", c.dataset.pool_size},
        {"pool_seed", c.dataset.pool_seed},
    };
    j["gan"] = {
        {"latent_dim", c.gan.latent_dim},
        {"g_widths", c.gan.g_widths},
        {"d_widths", c.gan.d_widths},
        {"learning_rate_g", c.gan.learning_rate_g},
        {"learning_rate_d", c.gan.learning_rate_d},
        {"batch_size", c.gan.batch_size},
        {"total_steps", c.gan.total_steps},
    };
    j["baseline"] = {
        {"kind", to_string(c.gan.baseline.kind)},
        {"sigma0", c.gan.baseline.sigma0},
        {"decay_steps", c.gan.baseline.decay_steps},
        {"real_target", c.gan.baseline.real_target},
    };
    if (c.apa) {
        j["apa"] = {
            {"heuristic", to_string(c.apa->heuristic)},
            {"threshold", c.apa->threshold},
            {"adjust_every", c.apa->adjust_every},
            {"ramp_images", c.apa->ramp_images},
            {"strategy", to_string(c.apa->strategy)},
            {"p_fixed", c.apa->p_fixed},
        };
    } else {
        j["apa"] = nullptr;
    }
    j["eval_every"] = c.eval_every;
    j["eval"] = {
        {"samples", c.eval.samples},
        {"capture_radius_stds", c.eval.capture_radius_stds},
        {"hit_threshold", c.eval.hit_threshold},
        {"hist_bins", c.eval.hist_bins},
        {"final_window", c.eval.final_window},
    };
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace apa

#pragma once

// Batch driver over the finite-support game checks, producing a JSON report.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "apa/theory.hpp"

namespace apa {

struct TheoryCheckConfig {
    std::size_t trials = 1000;
    std::size_t support = 8;
    std::vector<double> alphas{0.0, 0.25, 0.5, 0.9};
    std::uint64_t seed = 1;
    double grid_step = 1e-3;
    double identity_tolerance = 1e-9;
    std::size_t max_serialized_failures = 20;

    /// support in [2, 64], trials >= 1, every alpha in [0, 1).
    void validate() const;
};

/// Random instance for (alpha index, trial). Odd trials get sparse supports.
struct TheoryInstance {
    double alpha = 0.0;
    std::size_t alpha_index = 0;
    std::size_t trial = 0;
    DiscreteDistribution p_data;
    DiscreteDistribution p_g;
};

TheoryInstance theory_instance(const TheoryCheckConfig& config, std::size_t alpha_index, std::size_t trial);

struct InstanceCheck {
    GameEval game;
    Prop1Report prop1;
    Prop2Report prop2;
    bool dstar_in_range = true;
    double reduction_error = 0.0;  // only meaningful at alpha = 0
    std::vector<std::string> failed;  // names of failed checks

    bool passed() const { return failed.empty(); }
};

InstanceCheck check_instance(const DiscreteDistribution& p_data, const DiscreteDistribution& p_g, double alpha,
                             const TheoryCheckConfig& config, const DiscriminatorFn& dstar = optimal_discriminator);

struct TheoryReport {
    nlohmann::json json;
    bool passed = false;
};

TheoryReport verify_theory(const TheoryCheckConfig& config, const DiscriminatorFn& dstar = optimal_discriminator);

/// Re-runs one serialized failure (an element of report["failures"]).
InstanceCheck replay_failure(const nlohmann::json& failure, const TheoryCheckConfig& config,
                             const DiscriminatorFn& dstar = optimal_discriminator);

}  // namespace apa

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dmvf/graph.hpp"
#include "dmvf/orchestrator.hpp"
#include "dmvf/stream.hpp"

namespace dmvf {

/// Where a scene comes from: a saved manifest or a synthetic recipe.
struct SceneSource {
    std::optional<std::string> manifest;
    std::optional<SceneGenParams> synthetic;

    Scene build() const;
};

struct GraphSpec {
    std::string type = "complete";  // complete | path | ring | star | erdos_renyi | explicit
    int n = 0;
    double p = 0.5;                 // erdos_renyi only
    std::uint64_t seed = 0;         // erdos_renyi only
    std::vector<std::pair<int, int>> edges;  // explicit only

    CommGraph build() const;
};

struct SweepSpec {
    std::vector<SystemRequirement> requirements;  // defaults to the 5 canonical points
    std::vector<double> connectivity_p;           // defaults to a 10-point grid
    std::vector<ConsensusVariant> variants;       // defaults to all five
};

struct TrainSpec {
    std::vector<SceneSource> scenes;  // empty -> fall back to the eval scene
    double split = 0.8;               // leading fraction of scenes used for training
    TrainConfig config;
    int slow_actions = 15;
    int normal_actions = 25;
    int fast_actions = 35;
};

struct ExperimentConfig {
    SceneSource scene;
    GraphSpec graph;
    SystemRequirement requirement{3, 2, 1};
    ConsensusVariant variant = ConsensusVariant::Dmvf;
    std::int64_t period = 100;
    double alpha = 0.05;
    int window = 4;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::optional<std::string> checkpoint_slow;
    std::optional<std::string> checkpoint_normal;
    std::optional<std::string> checkpoint_fast;
    TrainSpec train;
    double dgd_gamma0 = 0.5;
    double extra_alpha = 0.1;
    StopRule stop;
    SweepSpec sweep;
    std::string out_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    /// Full pre-run validation: scene/graph consistency, requirement sums,
    /// period/alpha/window ranges, checkpoint files present when named.
    /// Throws ConfigError (or the relevant subtype) on the first violation.
    void validate() const;

    RunConfig run_config() const;

    /// Training scenes resolved per the split rule; never empty.
    std::vector<SceneSource> training_sources() const;

    /// Checkpoints when all three are named, otherwise trains in-process
    /// (deterministic for the given seed).
    PolicyBank make_policies(std::uint64_t seed) const;
};

}  // namespace dmvf

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dmvf/consensus.hpp"
#include "dmvf/graph.hpp"
#include "dmvf/netsim.hpp"
#include "dmvf/policy.hpp"
#include "dmvf/scoring.hpp"
#include "dmvf/stream.hpp"

namespace dmvf {

/// Mandated per-period counts of fast/normal/slow agents.
struct SystemRequirement {
    int fast = 0;
    int normal = 0;
    int slow = 0;

    int total() const { return fast + normal + slow; }
    void validate(int n_agents) const;
    std::string str() const;  // "X/Y/Z"
};

/// Ranks agents by score (descending, ties by ascending id); the top `slow`
/// get the slow pace, the next `normal` the normal pace, the rest fast.
std::vector<StrategyKind> select_strategies(const ScoreVector& scores,
                                            const SystemRequirement& req);

/// Round-robin fast/normal/slow by agent id until the requirement counts
/// fill up; the period-0 assignment.
std::vector<StrategyKind> initial_strategies(const SystemRequirement& req, int n_agents);

/// Fraction of globally-important frames lying within `window` of any
/// agent's selected index. 1.0 when nothing is important.
double coverage(const std::vector<std::vector<std::int64_t>>& selections,
                std::span<const std::uint8_t> global_truth, int window);

/// Total processed frames over all agents and periods, divided by N*L.
double processing_rate(const std::vector<std::int64_t>& processed_per_agent, int n_agents,
                       std::int64_t scene_length);

struct PeriodRecord {
    std::int64_t period = 0;
    std::vector<StrategyKind> strategy_used;
    std::vector<std::int64_t> processed;
    std::vector<std::vector<std::int64_t>> selected;  // per agent, ascending
    ScoreVector final_scores;
    std::vector<StrategyKind> next_strategy;
    std::int64_t consensus_iterations = 0;
    std::int64_t consensus_rounds = 0;
    double consensus_residual = 0.0;
    double coverage_so_far = 0.0;
};

struct RunSummary {
    std::string variant;
    double coverage = 0.0;
    double processing_rate = 0.0;
    CommLedger ledger;
    std::vector<PeriodRecord> periods;
    std::int64_t scene_length = 0;
    int n_agents = 0;
    int dim = 0;
    // Frame payload items delivered after the per-period buffer exchange;
    // the consensus phase must keep this at zero.
    std::int64_t consensus_phase_frames = 0;

    std::string summary_csv() const;
    std::string ledger_csv() const;
    std::string consensus_csv() const;
};

/// The three shared pace policies agents switch between.
struct PolicyBank {
    QPolicy slow;
    QPolicy normal;
    QPolicy fast;

    const QPolicy& get(StrategyKind kind) const;
};

struct RunConfig {
    ConsensusVariant variant = ConsensusVariant::Dmvf;
    SystemRequirement requirement;
    std::int64_t period = 100;
    double alpha = 0.05;  // frame-similarity scale
    int window = 4;       // coverage extension radius
    double dgd_gamma0 = 0.5;
    double extra_alpha = 0.1;
    StopRule stop;
};

/// The full collaborative loop: per period, every agent fast-forwards with
/// its current pace, exchanges selections with neighbors, scores its
/// neighborhood, agrees on a system-wide score vector via the chosen
/// consensus variant, and re-ranks paces for the next period.
RunSummary run_experiment(const Scene& scene, const CommGraph& graph, const PolicyBank& bank,
                          const RunConfig& config);

/// No-communication reference: every agent runs its own fixed policy over
/// the whole scene (same period structure, same metrics, empty ledger).
/// make_policy is called once per agent so stochastic policies never share
/// state.
RunSummary run_independent(const Scene& scene,
                           const std::function<std::unique_ptr<SkipPolicy>(int)>& make_policy,
                           std::int64_t period, int window);

}  // namespace dmvf

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dmvf/selection.hpp"
#include "dmvf/stream.hpp"

namespace dmvf {

enum class StrategyKind { Slow, Normal, Fast };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

/// A pace: its reward shaping follows its kind, its action space caps the
/// skip size (defaults 15/25/35 for slow/normal/fast).
struct StrategySpec {
    StrategyKind kind = StrategyKind::Normal;
    int action_space = 25;

    static StrategySpec slow(int actions = 15) { return {StrategyKind::Slow, actions}; }
    static StrategySpec normal(int actions = 25) { return {StrategyKind::Normal, actions}; }
    static StrategySpec fast(int actions = 35) { return {StrategyKind::Fast, actions}; }
};

struct RewardParams {
    int hit_window = 4;          // frames; proximity radius of the landing reward
    double skip_beta = 0.1;      // weight of the skipped-unimportant bonus
};

/// Fraction of skipped frames that were important, minus beta times the
/// unimportant fraction. The list covers the a_k frames the action advanced
/// over (landing frame included); it must not be empty.
double skip_penalty(std::span<const std::uint8_t> skipped_labels, double beta);

/// exp(-d/w) for d = hop distance from the landing frame to the nearest
/// important frame, 0 beyond the window (and 0 when nothing is important).
double hit_reward(std::int64_t landing, std::span<const std::uint8_t> truth, int window);

/// Pace-shaped step reward. Normal: -SP+HR. Slow multiplies by
/// (1 - sigmoid(a)/2), fast by (1 + sigmoid(a)/2).
double shaped_reward(const StrategySpec& strategy, double sp, double hr, int action);

/// Anything that can pick the next skip size from the current frame feature.
struct SkipPolicy {
    virtual ~SkipPolicy() = default;
    virtual int choose(std::span<const float> feature) = 0;
    virtual int action_space() const = 0;
};

/// Buckets features by the sign pattern of centered random projections.
struct FeatureQuantizer {
    int dim = 0;
    int bits = 0;
    std::vector<double> center;  // dim
    std::vector<double> planes;  // bits x dim, row-major

    int bucket_count() const { return 1 << bits; }
    int bucket(std::span<const float> feature) const;
};

struct TrainConfig {
    int episodes = 60;
    double learning_rate = 0.1;
    double discount = 0.95;
    double eps_start = 1.0;
    double eps_end = 0.1;
    int quantizer_bits = 10;
    RewardParams reward;
    // Test/inspection hooks; both optional.
    std::function<void(int episode, double step_reward)> step_observer;
    std::vector<double>* episode_rewards = nullptr;
};

/// Greedy table-lookup skip policy; immutable once trained.
class QPolicy : public SkipPolicy {
public:
    QPolicy() = default;
    QPolicy(StrategySpec spec, FeatureQuantizer quantizer, std::vector<double> table);

    int choose(std::span<const float> feature) override { return greedy_action(feature); }
    int action_space() const override { return spec_.action_space; }

    /// argmax over Q[bucket(feature)][a], ties to the smallest action.
    int greedy_action(std::span<const float> feature) const;
    double q_value(std::span<const float> feature, int action) const;

    const StrategySpec& spec() const { return spec_; }
    const FeatureQuantizer& quantizer() const { return quantizer_; }
    const std::vector<double>& table() const { return table_; }

    void save(const std::filesystem::path& path) const;
    static QPolicy load(const std::filesystem::path& path);

private:
    friend QPolicy train_q(const std::vector<const VideoStream*>&, const StrategySpec&,
                           const TrainConfig&, std::uint64_t);
    StrategySpec spec_;
    FeatureQuantizer quantizer_;
    std::vector<double> table_;  // bucket-major: table_[bucket * A + (a-1)]
};

/// Episodic one-step Q-learning over the skip MDP: state = current frame
/// feature (quantized), action = skip 1..A, transition = jump forward,
/// reward = shaped_reward over the advanced-over labels. Epsilon decays
/// linearly across episodes; greedy at inference. Deterministic per seed.
QPolicy train_q(const std::vector<const VideoStream*>& streams, const StrategySpec& spec,
                const TrainConfig& config, std::uint64_t seed);

/// Uniform-random skip in [1, A]; the stochastic baseline.
class RandomSkipPolicy : public SkipPolicy {
public:
    RandomSkipPolicy(int actions, std::uint64_t seed);
    int choose(std::span<const float> feature) override;
    int action_space() const override { return actions_; }

private:
    int actions_;
    std::uint64_t state_;
};

/// Fixed-stride skip; the periodic baseline.
class UniformSkipPolicy : public SkipPolicy {
public:
    explicit UniformSkipPolicy(int stride);
    int choose(std::span<const float> feature) override { return stride_; }
    int action_space() const override { return stride_; }

private:
    int stride_;
};

struct PeriodRun {
    SelectionBuffer buffer;
    std::int64_t carryover = 0;  // overshoot past the segment end, in frames
};

/// Runs one adaptation period over stream[begin, end): starting from
/// start_pos (absolute; >= begin, may be >= end), repeatedly process the
/// current frame, pick a skip, advance. Returns the kept frames and how far
/// the final jump overshot the segment. start_pos >= end yields an empty
/// buffer and carryover = start_pos - end.
PeriodRun fast_forward_period(SkipPolicy& policy, const VideoStream& stream, std::int64_t begin,
                              std::int64_t end, std::int64_t start_pos,
                              std::int64_t period_index);

}  // namespace dmvf

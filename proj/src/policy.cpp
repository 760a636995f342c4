#include "dmvf/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "dmvf/errors.hpp"
#include "dmvf/rng.hpp"

namespace dmvf {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Slow: return "slow";
        case StrategyKind::Normal: return "normal";
        case StrategyKind::Fast: return "fast";
    }
    throw ConfigError("unknown strategy kind");
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "slow") return StrategyKind::Slow;
    if (name == "normal") return StrategyKind::Normal;
    if (name == "fast") return StrategyKind::Fast;
    throw ConfigError("unknown strategy name: " + name);
}

double skip_penalty(std::span<const std::uint8_t> skipped_labels, double beta) {
    if (skipped_labels.empty())
        throw ConfigError("skip_penalty: empty label window (actions start at 1)");
    const double n = static_cast<double>(skipped_labels.size());
    std::int64_t important = 0;
    for (auto l : skipped_labels) important += (l != 0);
    const double unimportant = n - static_cast<double>(important);
    return static_cast<double>(important) / n - beta * unimportant / n;
}

double hit_reward(std::int64_t landing, std::span<const std::uint8_t> truth, int window) {
    if (landing < 0 || landing >= static_cast<std::int64_t>(truth.size()))
        throw ConfigError("hit_reward: landing index " + std::to_string(landing) +
                          " outside stream of length " + std::to_string(truth.size()));
    if (window < 0) throw ConfigError("hit_reward: negative window");
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    const std::int64_t lo = std::max<std::int64_t>(0, landing - window);
    const std::int64_t hi =
        std::min<std::int64_t>(static_cast<std::int64_t>(truth.size()) - 1, landing + window);
    for (std::int64_t t = lo; t <= hi; ++t)
        if (truth[t]) best = std::min<std::int64_t>(best, std::abs(t - landing));
    if (best > window) return 0.0;
    if (best == 0) return 1.0;
    return std::exp(-static_cast<double>(best) / static_cast<double>(window));
}

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

double shaped_reward(const StrategySpec& strategy, double sp, double hr, int action) {
    if (action < 1 || action > strategy.action_space)
        throw ConfigError("action " + std::to_string(action) + " outside [1," +
                          std::to_string(strategy.action_space) + "]");
    const double base = -sp + hr;
    switch (strategy.kind) {
        case StrategyKind::Normal: return base;
        case StrategyKind::Slow: return base * (1.0 - sigmoid(static_cast<double>(action)) / 2.0);
        case StrategyKind::Fast: return base * (1.0 + sigmoid(static_cast<double>(action)) / 2.0);
    }
    throw ConfigError("unknown strategy kind");
}

int FeatureQuantizer::bucket(std::span<const float> feature) const {
    if (static_cast<int>(feature.size()) != dim)
        throw DimensionMismatchError("quantizer expects dim " + std::to_string(dim) + ", got " +
                                     std::to_string(feature.size()));
    int code = 0;
    for (int b = 0; b < bits; ++b) {
        double dot = 0.0;
        const double* row = planes.data() + static_cast<std::size_t>(b) * dim;
        for (int d = 0; d < dim; ++d)
            dot += row[d] * (static_cast<double>(feature[d]) - center[d]);
        if (dot >= 0.0) code |= (1 << b);
    }
    return code;
}

QPolicy::QPolicy(StrategySpec spec, FeatureQuantizer quantizer, std::vector<double> table)
    : spec_(spec), quantizer_(std::move(quantizer)), table_(std::move(table)) {
    if (static_cast<int>(table_.size()) != quantizer_.bucket_count() * spec_.action_space)
        throw ConfigError("Q table size does not match quantizer/action space");
}

int QPolicy::greedy_action(std::span<const float> feature) const {
    const int b = quantizer_.bucket(feature);
    const double* row = table_.data() + static_cast<std::size_t>(b) * spec_.action_space;
    int best = 1;
    double best_q = row[0];
    for (int a = 2; a <= spec_.action_space; ++a) {
        if (row[a - 1] > best_q) {
            best_q = row[a - 1];
            best = a;
        }
    }
    return best;
}

double QPolicy::q_value(std::span<const float> feature, int action) const {
    if (action < 1 || action > spec_.action_space)
        throw ConfigError("q_value: action out of range");
    const int b = quantizer_.bucket(feature);
    return table_[static_cast<std::size_t>(b) * spec_.action_space + action - 1];
}

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x44564d4651504c31ULL;  // "DVMFQPL1"

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void QPolicy::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    write_pod(f, kCheckpointMagic);
    write_pod(f, static_cast<std::int32_t>(spec_.kind));
    write_pod(f, static_cast<std::int32_t>(spec_.action_space));
    write_pod(f, static_cast<std::int32_t>(quantizer_.dim));
    write_pod(f, static_cast<std::int32_t>(quantizer_.bits));
    f.write(reinterpret_cast<const char*>(quantizer_.center.data()),
            static_cast<std::streamsize>(quantizer_.center.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(quantizer_.planes.data()),
            static_cast<std::streamsize>(quantizer_.planes.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(table_.data()),
            static_cast<std::streamsize>(table_.size() * sizeof(double)));
    if (!f) throw IoError("write failed: " + path.string());
}

QPolicy QPolicy::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::uint64_t magic = 0;
    read_pod(f, magic);
    if (magic != kCheckpointMagic)
        throw FormatError("not a policy checkpoint: " + path.string());
    std::int32_t kind = 0, actions = 0, dim = 0, bits = 0;
    read_pod(f, kind);
    read_pod(f, actions);
    read_pod(f, dim);
    read_pod(f, bits);
    if (kind < 0 || kind > 2 || actions < 1 || dim < 1 || bits < 1 || bits > 24)
        throw FormatError("corrupt policy checkpoint header: " + path.string());
    QPolicy p;
    p.spec_ = StrategySpec{static_cast<StrategyKind>(kind), actions};
    p.quantizer_.dim = dim;
    p.quantizer_.bits = bits;
    p.quantizer_.center.resize(dim);
    p.quantizer_.planes.resize(static_cast<std::size_t>(bits) * dim);
    p.table_.resize(static_cast<std::size_t>(1 << bits) * actions);
    f.read(reinterpret_cast<char*>(p.quantizer_.center.data()),
           static_cast<std::streamsize>(p.quantizer_.center.size() * sizeof(double)));
    f.read(reinterpret_cast<char*>(p.quantizer_.planes.data()),
           static_cast<std::streamsize>(p.quantizer_.planes.size() * sizeof(double)));
    f.read(reinterpret_cast<char*>(p.table_.data()),
           static_cast<std::streamsize>(p.table_.size() * sizeof(double)));
    if (!f) throw TruncatedFileError("policy checkpoint truncated: " + path.string());
    return p;
}

QPolicy train_q(const std::vector<const VideoStream*>& streams, const StrategySpec& spec,
                const TrainConfig& cfg, std::uint64_t seed) {
    if (streams.empty()) throw ConfigError("train_q: no training streams");
    if (cfg.episodes < 0) throw ConfigError("train_q: negative episode count");
    const int dim = streams.front()->dim;
    for (const auto* s : streams) {
        if (s == nullptr || s->length() == 0) throw ConfigError("train_q: empty training stream");
        if (s->dim != dim) throw DimensionMismatchError("train_q: streams disagree on dim");
    }
    const int A = spec.action_space;
    if (A < 1) throw ConfigError("train_q: action space must be >= 1");

    FeatureQuantizer quant;
    quant.dim = dim;
    quant.bits = cfg.quantizer_bits;
    quant.center.assign(dim, 0.0);
    std::int64_t total_frames = 0;
    for (const auto* s : streams) {
        for (const auto& fr : s->frames)
            for (int d = 0; d < dim; ++d) quant.center[d] += fr.feature[d];
        total_frames += s->length();
    }
    for (auto& c : quant.center) c /= static_cast<double>(total_frames);
    quant.planes.resize(static_cast<std::size_t>(quant.bits) * dim);
    {
        auto rng = make_rng(seed, 0x51);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& w : quant.planes) w = gauss(rng);
    }

    std::vector<double> table(static_cast<std::size_t>(quant.bucket_count()) * A, 0.0);

    auto rng = make_rng(seed, 0x52);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> rand_action(1, A);

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const VideoStream& s = *streams[ep % streams.size()];
        const std::int64_t L = s.length();
        std::vector<std::uint8_t> truth(L);
        for (std::int64_t t = 0; t < L; ++t) truth[t] = s.frames[t].important ? 1 : 0;

        const double eps =
            cfg.episodes <= 1
                ? cfg.eps_start
                : cfg.eps_start + (cfg.eps_end - cfg.eps_start) *
                                      (static_cast<double>(ep) / (cfg.episodes - 1));
        double episode_total = 0.0;
        std::int64_t pos = 0;
        while (pos < L) {
            const int b = quant.bucket(s.feature_at(pos));
            double* row = table.data() + static_cast<std::size_t>(b) * A;
            int action;
            if (unif(rng) < eps) {
                action = rand_action(rng);
            } else {
                action = 1;
                for (int a = 2; a <= A; ++a)
                    if (row[a - 1] > row[action - 1]) action = a;
            }
            const std::int64_t next = pos + action;

            // Labels of the frames this action advanced over, clipped at the
            // stream end (the window can be empty only on the final jump).
            const std::int64_t win_end = std::min<std::int64_t>(next, L - 1);
            double sp = 0.0;
            if (win_end >= pos + 1)
                sp = skip_penalty(
                    std::span<const std::uint8_t>(truth.data() + pos + 1,
                                                  static_cast<std::size_t>(win_end - pos)),
                    cfg.reward.skip_beta);
            const bool terminal = next >= L;
            const double hr = terminal ? 0.0 : hit_reward(next, truth, cfg.reward.hit_window);
            const double r = shaped_reward(spec, sp, hr, action);

            double target = r;
            if (!terminal) {
                const int nb = quant.bucket(s.feature_at(next));
                const double* nrow = table.data() + static_cast<std::size_t>(nb) * A;
                double best = nrow[0];
                for (int a = 2; a <= A; ++a) best = std::max(best, nrow[a - 1]);
                target += cfg.discount * best;
            }
            row[action - 1] += cfg.learning_rate * (target - row[action - 1]);
            if (!std::isfinite(row[action - 1]))
                throw DivergenceError("train_q: non-finite Q value at episode " +
                                      std::to_string(ep) + ", pos " + std::to_string(pos));

            if (cfg.step_observer) cfg.step_observer(ep, r);
            episode_total += r;
            pos = next;
        }
        if (cfg.episode_rewards) cfg.episode_rewards->push_back(episode_total);
    }

    return QPolicy(spec, std::move(quant), std::move(table));
}

RandomSkipPolicy::RandomSkipPolicy(int actions, std::uint64_t seed)
    : actions_(actions), state_(mix_seed(seed, 0x77)) {
    if (actions < 1) throw ConfigError("RandomSkipPolicy: actions must be >= 1");
}

int RandomSkipPolicy::choose(std::span<const float>) {
    // splitmix64 step; self-contained so copies of the policy never share state.
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return 1 + static_cast<int>(z % static_cast<std::uint64_t>(actions_));
}

UniformSkipPolicy::UniformSkipPolicy(int stride) : stride_(stride) {
    if (stride < 1) throw ConfigError("UniformSkipPolicy: stride must be >= 1");
}

PeriodRun fast_forward_period(SkipPolicy& policy, const VideoStream& stream, std::int64_t begin,
                              std::int64_t end, std::int64_t start_pos,
                              std::int64_t period_index) {
    if (begin < 0 || end > stream.length() || begin >= end)
        throw ConfigError("fast_forward_period: bad segment [" + std::to_string(begin) + "," +
                          std::to_string(end) + ")");
    if (start_pos < begin)
        throw ConfigError("fast_forward_period: start_pos before segment begin");
    PeriodRun run;
    run.buffer.view_id = stream.view_id;
    run.buffer.period_index = period_index;
    std::int64_t pos = start_pos;
    while (pos < end) {
        const auto feat = stream.feature_at(pos);
        run.buffer.selected.push_back(
            SelectedFrame{pos, std::vector<float>(feat.begin(), feat.end())});
        const int a = std::clamp(policy.choose(feat), 1, policy.action_space());
        pos += a;
    }
    run.buffer.processed_count = run.buffer.size();
    run.carryover = pos - end;
    return run;
}

}  // namespace dmvf

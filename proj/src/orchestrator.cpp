#include "dmvf/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmvf/csv.hpp"
#include "dmvf/errors.hpp"

namespace dmvf {

void SystemRequirement::validate(int n_agents) const {
    if (fast < 0 || normal < 0 || slow < 0)
        throw ConfigError("requirement counts must be nonnegative, got " + str());
    if (total() != n_agents)
        throw ConfigError("requirement " + str() + " sums to " + std::to_string(total()) +
                          ", need " + std::to_string(n_agents));
}

std::string SystemRequirement::str() const {
    return std::to_string(fast) + "/" + std::to_string(normal) + "/" + std::to_string(slow);
}

std::vector<StrategyKind> select_strategies(const ScoreVector& scores,
                                            const SystemRequirement& req) {
    const int n = static_cast<int>(scores.size());
    req.validate(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<StrategyKind> out(n, StrategyKind::Fast);
    for (int rank = 0; rank < n; ++rank) {
        if (rank < req.slow)
            out[order[rank]] = StrategyKind::Slow;
        else if (rank < req.slow + req.normal)
            out[order[rank]] = StrategyKind::Normal;
        else
            out[order[rank]] = StrategyKind::Fast;
    }
    return out;
}

std::vector<StrategyKind> initial_strategies(const SystemRequirement& req, int n_agents) {
    req.validate(n_agents);
    int left_fast = req.fast, left_normal = req.normal, left_slow = req.slow;
    std::vector<StrategyKind> out;
    out.reserve(n_agents);
    int turn = 0;  // cycles fast -> normal -> slow, skipping exhausted kinds
    while (static_cast<int>(out.size()) < n_agents) {
        if (turn == 0 && left_fast > 0) {
            out.push_back(StrategyKind::Fast);
            --left_fast;
        } else if (turn == 1 && left_normal > 0) {
            out.push_back(StrategyKind::Normal);
            --left_normal;
        } else if (turn == 2 && left_slow > 0) {
            out.push_back(StrategyKind::Slow);
            --left_slow;
        }
        turn = (turn + 1) % 3;
    }
    return out;
}

double coverage(const std::vector<std::vector<std::int64_t>>& selections,
                std::span<const std::uint8_t> global_truth, int window) {
    if (window < 0) throw ConfigError("coverage: negative window");
    const std::int64_t L = static_cast<std::int64_t>(global_truth.size());
    std::vector<std::uint8_t> covered(L, 0);
    for (const auto& sel : selections) {
        for (std::int64_t idx : sel) {
            const std::int64_t lo = std::max<std::int64_t>(0, idx - window);
            const std::int64_t hi = std::min<std::int64_t>(L - 1, idx + window);
            for (std::int64_t t = lo; t <= hi; ++t) covered[t] = 1;
        }
    }
    std::int64_t important = 0, hit = 0;
    for (std::int64_t t = 0; t < L; ++t) {
        if (global_truth[t]) {
            ++important;
            if (covered[t]) ++hit;
        }
    }
    if (important == 0) return 1.0;
    return static_cast<double>(hit) / static_cast<double>(important);
}

double processing_rate(const std::vector<std::int64_t>& processed_per_agent, int n_agents,
                       std::int64_t scene_length) {
    if (n_agents < 1 || scene_length < 1) throw ConfigError("processing_rate: empty scene");
    const std::int64_t total =
        std::accumulate(processed_per_agent.begin(), processed_per_agent.end(), std::int64_t{0});
    return static_cast<double>(total) /
           (static_cast<double>(n_agents) * static_cast<double>(scene_length));
}

const QPolicy& PolicyBank::get(StrategyKind kind) const {
    switch (kind) {
        case StrategyKind::Slow: return slow;
        case StrategyKind::Normal: return normal;
        case StrategyKind::Fast: return fast;
    }
    throw ConfigError("unknown strategy kind");
}

namespace {

// Period-level coverage bookkeeping: union of extended selections so far,
// evaluated against the truth prefix that is already in the past.
struct CoverageTracker {
    explicit CoverageTracker(std::span<const std::uint8_t> truth, int window)
        : truth_(truth), window_(window), covered_(truth.size(), 0) {}

    void add(const std::vector<std::int64_t>& selection) {
        const std::int64_t L = static_cast<std::int64_t>(truth_.size());
        for (std::int64_t idx : selection) {
            const std::int64_t lo = std::max<std::int64_t>(0, idx - window_);
            const std::int64_t hi = std::min<std::int64_t>(L - 1, idx + window_);
            for (std::int64_t t = lo; t <= hi; ++t) covered_[t] = 1;
        }
    }

    double fraction_up_to(std::int64_t end) const {
        std::int64_t important = 0, hit = 0;
        for (std::int64_t t = 0; t < std::min<std::int64_t>(end, truth_.size()); ++t) {
            if (truth_[t]) {
                ++important;
                if (covered_[t]) ++hit;
            }
        }
        return important == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(important);
    }

private:
    std::span<const std::uint8_t> truth_;
    int window_;
    std::vector<std::uint8_t> covered_;
};

std::vector<std::int64_t> indices_of(const SelectionBuffer& buf) {
    std::vector<std::int64_t> out;
    out.reserve(buf.selected.size());
    for (const auto& f : buf.selected) out.push_back(f.index);
    return out;
}

// Stack-local view of a trained policy; lets concurrent agents share one
// immutable table without copying it.
struct GreedyView final : SkipPolicy {
    const QPolicy* policy;
    explicit GreedyView(const QPolicy& p) : policy(&p) {}
    int choose(std::span<const float> feature) override { return policy->greedy_action(feature); }
    int action_space() const override { return policy->action_space(); }
};

}  // namespace

RunSummary run_experiment(const Scene& scene, const CommGraph& graph, const PolicyBank& bank,
                          const RunConfig& config) {
    scene.validate();
    graph.require_connected();
    const int n = scene.n_views();
    if (graph.n != n)
        throw ConfigError("graph has " + std::to_string(graph.n) + " nodes for " +
                          std::to_string(n) + " views");
    config.requirement.validate(n);
    if (config.period < 1) throw ConfigError("period must be >= 1");
    const std::int64_t L = scene.length();
    if (L == 0) throw ConfigError("empty scene");

    Network net(graph);
    RunSummary summary;
    summary.variant = to_string(config.variant);
    summary.scene_length = L;
    summary.n_agents = n;
    summary.dim = scene.dim();

    std::vector<StrategyKind> strategies = initial_strategies(config.requirement, n);
    std::vector<std::int64_t> positions(n, 0);  // absolute resume position per agent
    std::vector<std::int64_t> processed_totals(n, 0);
    CoverageTracker tracker(scene.global_truth, config.window);

    const std::int64_t n_periods = (L + config.period - 1) / config.period;
    for (std::int64_t t = 0; t < n_periods; ++t) {
        net.begin_period();
        const std::int64_t begin = t * config.period;
        const std::int64_t end = std::min<std::int64_t>(L, begin + config.period);

        PeriodRecord rec;
        rec.period = t;
        rec.strategy_used = strategies;

        // (1) Every agent fast-forwards its own view; independent slots, so
        // the parallel loop is deterministic.
        std::vector<SelectionBuffer> buffers(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            GreedyView policy(bank.get(strategies[i]));
            auto run = fast_forward_period(policy, scene.streams[i], begin, end, positions[i], t);
            buffers[i] = std::move(run.buffer);
            positions[i] = end + run.carryover;
        }

        // (2) Buffer exchange with neighbors, once per period.
        for (int i = 0; i < n; ++i)
            for (int j : graph.adj[i])
                net.send(Message{i, j, SelectedFramesPayload{buffers[i], scene.dim()}});
        auto buffer_inboxes = net.exchange_round();
        const std::int64_t frames_after_buffers = net.ledger().cumulative.frames_sent;

        // (3) Local neighborhood scoring.
        std::vector<InitialScoreSet> scores(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            std::map<int, const SelectionBuffer*> hood;
            hood[i] = &buffers[i];
            for (const auto& msg : buffer_inboxes[i])
                hood[msg.src] = &std::get<SelectedFramesPayload>(msg.payload).buffer;
            scores[i] = initial_scores(i, hood, graph, config.alpha);
        }

        // (4) Initial-score exchange: i tells each neighbor j what it thinks
        // of j, degree piggybacked.
        for (int i = 0; i < n; ++i)
            for (int j : graph.adj[i])
                net.send(Message{i, j, InitialScorePayload{j, scores[i].at(j), scores[i].degree}});
        auto score_inboxes = net.exchange_round();
        std::vector<std::vector<ScoreEntry>> received(n);
        for (int i = 0; i < n; ++i) {
            received[i].push_back(ScoreEntry{i, scores[i].at(i), scores[i].degree});
            for (const auto& msg : score_inboxes[i]) {
                const auto& p = std::get<InitialScorePayload>(msg.payload);
                received[i].push_back(ScoreEntry{msg.src, p.score, p.sender_degree});
            }
        }

        // (5) System-wide consensus.
        ConsensusReport report;
        switch (config.variant) {
            case ConsensusVariant::Dmvf:
            case ConsensusVariant::Ave:
            case ConsensusVariant::One: {
                std::vector<ScoreVector> locals(n, ScoreVector(n, 0.0));
                for (int i = 0; i < n; ++i) {
                    const auto hood = graph.closed_neighborhood(i);
                    double xi = 0.0;
                    if (config.variant == ConsensusVariant::Dmvf)
                        xi = weighted_update(received[i], hood);
                    else if (config.variant == ConsensusVariant::Ave)
                        xi = ave_update(received[i], hood);
                    else
                        xi = one_update(scores[i].at(i));
                    locals[i][i] = xi;
                }
                report = maximal_consensus(locals, graph, &net);
                report.variant = to_string(config.variant);
                break;
            }
            case ConsensusVariant::Dgd:
            case ConsensusVariant::Extra: {
                std::vector<ScoreVector> rows(n, ScoreVector(n, 0.0));
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) rows[i][j] = scores[i].at(j);
                if (config.variant == ConsensusVariant::Dgd)
                    report = dgd_solve(rows, graph, config.dgd_gamma0, config.stop, &net);
                else
                    report = extra_solve(rows, graph, config.extra_alpha, config.stop, &net);
                break;
            }
        }

        // (6) Re-rank paces for the next period.
        std::vector<StrategyKind> next = select_strategies(report.final, config.requirement);

        for (int i = 0; i < n; ++i) {
            rec.processed.push_back(buffers[i].processed_count);
            processed_totals[i] += buffers[i].processed_count;
            rec.selected.push_back(indices_of(buffers[i]));
            tracker.add(rec.selected.back());
        }
        rec.final_scores = report.final;
        rec.next_strategy = next;
        rec.consensus_iterations = report.iterations;
        rec.consensus_rounds = report.message_rounds;
        rec.consensus_residual = report.residual;
        rec.coverage_so_far = tracker.fraction_up_to(end);
        summary.periods.push_back(std::move(rec));
        summary.consensus_phase_frames +=
            net.ledger().cumulative.frames_sent - frames_after_buffers;

        strategies = std::move(next);
    }

    summary.ledger = net.ledger();
    std::vector<std::vector<std::int64_t>> all_selections(n);
    for (const auto& rec : summary.periods)
        for (int i = 0; i < n; ++i)
            all_selections[i].insert(all_selections[i].end(), rec.selected[i].begin(),
                                     rec.selected[i].end());
    summary.coverage = coverage(all_selections, scene.global_truth, config.window);
    summary.processing_rate = processing_rate(processed_totals, n, L);
    return summary;
}

RunSummary run_independent(const Scene& scene,
                           const std::function<std::unique_ptr<SkipPolicy>(int)>& make_policy,
                           std::int64_t period, int window) {
    scene.validate();
    const int n = scene.n_views();
    const std::int64_t L = scene.length();
    if (L == 0) throw ConfigError("empty scene");
    if (period < 1) throw ConfigError("period must be >= 1");

    RunSummary summary;
    summary.variant = "independent";
    summary.scene_length = L;
    summary.n_agents = n;
    summary.dim = scene.dim();

    std::vector<std::unique_ptr<SkipPolicy>> policies(n);
    for (int i = 0; i < n; ++i) policies[i] = make_policy(i);

    std::vector<std::int64_t> positions(n, 0);
    std::vector<std::int64_t> processed_totals(n, 0);
    CoverageTracker tracker(scene.global_truth, window);

    const std::int64_t n_periods = (L + period - 1) / period;
    for (std::int64_t t = 0; t < n_periods; ++t) {
        const std::int64_t begin = t * period;
        const std::int64_t end = std::min<std::int64_t>(L, begin + period);
        PeriodRecord rec;
        rec.period = t;

        std::vector<SelectionBuffer> buffers(n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            auto run = fast_forward_period(*policies[i], scene.streams[i], begin, end,
                                           positions[i], t);
            buffers[i] = std::move(run.buffer);
            positions[i] = end + run.carryover;
        }
        for (int i = 0; i < n; ++i) {
            rec.strategy_used.push_back(StrategyKind::Normal);
            rec.next_strategy.push_back(StrategyKind::Normal);
            rec.processed.push_back(buffers[i].processed_count);
            processed_totals[i] += buffers[i].processed_count;
            rec.selected.push_back(indices_of(buffers[i]));
            tracker.add(rec.selected.back());
        }
        rec.coverage_so_far = tracker.fraction_up_to(end);
        summary.periods.push_back(std::move(rec));
    }

    std::vector<std::vector<std::int64_t>> all_selections(n);
    for (const auto& rec : summary.periods)
        for (int i = 0; i < n; ++i)
            all_selections[i].insert(all_selections[i].end(), rec.selected[i].begin(),
                                     rec.selected[i].end());
    summary.coverage = coverage(all_selections, scene.global_truth, window);
    summary.processing_rate = processing_rate(processed_totals, n, L);
    return summary;
}

std::string RunSummary::summary_csv() const {
    CsvWriter csv;
    std::vector<std::string> header = {"period"};
    for (int i = 0; i < n_agents; ++i) header.push_back("strategy_" + std::to_string(i));
    for (int i = 0; i < n_agents; ++i) header.push_back("processed_" + std::to_string(i));
    header.push_back("coverage_so_far");
    csv.header(header);
    for (const auto& rec : periods) {
        std::vector<std::string> row = {std::to_string(rec.period)};
        for (auto s : rec.strategy_used) row.push_back(to_string(s));
        for (auto p : rec.processed) row.push_back(std::to_string(p));
        row.push_back(fmt_double(rec.coverage_so_far));
        csv.row_strings(row);
    }
    csv.row_strings({"final", fmt_double(coverage), fmt_double(processing_rate),
                     std::to_string(ledger.cumulative.bytes_total)});
    return csv.str();
}

std::string RunSummary::ledger_csv() const {
    CsvWriter csv;
    csv.header({"period", "frames_sent", "score_messages", "bytes_total",
                "bytes_fraction_of_raw"});
    for (std::size_t t = 0; t < ledger.periods.size(); ++t) {
        const auto& p = ledger.periods[t];
        CommLedger single;
        single.cumulative = p;
        csv.row_strings({std::to_string(t), std::to_string(p.frames_sent),
                         std::to_string(p.score_messages), std::to_string(p.bytes_total),
                         fmt_double(single.bytes_fraction_of_raw(scene_length, n_agents, dim))});
    }
    csv.row_strings({"total", std::to_string(ledger.cumulative.frames_sent),
                     std::to_string(ledger.cumulative.score_messages),
                     std::to_string(ledger.cumulative.bytes_total),
                     fmt_double(ledger.bytes_fraction_of_raw(scene_length, n_agents, dim))});
    return csv.str();
}

std::string RunSummary::consensus_csv() const {
    CsvWriter csv;
    csv.header({"variant", "iterations", "message_rounds", "residual"});
    for (const auto& rec : periods)
        csv.row_strings({variant, std::to_string(rec.consensus_iterations),
                         std::to_string(rec.consensus_rounds),
                         fmt_double(rec.consensus_residual)});
    return csv.str();
}

}  // namespace dmvf

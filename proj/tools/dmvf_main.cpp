// Experiment front-end: train pace policies, run single experiments, sweep
// requirements / connectivity / consensus variants, generate synthetic
// scenes, validate configs. Every output lands under --out together with the
// resolved config, and identical config+seeds give byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmvf/config.hpp"
#include "dmvf/csv.hpp"
#include "dmvf/errors.hpp"
#include "dmvf/orchestrator.hpp"
#include "dmvf/rng.hpp"

namespace fs = std::filesystem;
using namespace dmvf;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string scene;
    std::string graph;
    std::string req;
    std::string consensus;
    std::int64_t period = -1;
    double alpha = -1;
    int window = -1;
    std::int64_t seed = -1;
    std::string out;
};

GraphSpec parse_graph_flag(const std::string& text) {
    // complete:N | path:N | ring:N | star:N | er:N:P[:SEED]
    GraphSpec g;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto next = text.find(':', pos);
        parts.push_back(text.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (parts.size() < 2) throw ConfigError("bad --graph value: " + text);
    g.type = parts[0] == "er" ? "erdos_renyi" : parts[0];
    g.n = std::stoi(parts[1]);
    if (g.type == "erdos_renyi") {
        if (parts.size() < 3) throw ConfigError("--graph er needs er:N:P[:SEED]");
        g.p = std::stod(parts[2]);
        if (parts.size() > 3) g.seed = std::stoull(parts[3]);
    }
    return g;
}

SystemRequirement parse_req_flag(const std::string& text) {
    SystemRequirement r;
    if (std::sscanf(text.c_str(), "%d/%d/%d", &r.fast, &r.normal, &r.slow) != 3)
        throw ConfigError("bad --req value (expected X/Y/Z): " + text);
    return r;
}

ExperimentConfig resolve_config(const CliOverrides& o) {
    ExperimentConfig c;
    if (!o.config_path.empty()) c = ExperimentConfig::from_file(o.config_path);
    if (!o.scene.empty()) {
        c.scene = SceneSource{};
        c.scene.manifest = o.scene;
    }
    if (!o.graph.empty()) c.graph = parse_graph_flag(o.graph);
    if (!o.req.empty()) c.requirement = parse_req_flag(o.req);
    if (!o.consensus.empty()) c.variant = consensus_from_string(o.consensus);
    if (o.period > 0) c.period = o.period;
    if (o.alpha > 0) c.alpha = o.alpha;
    if (o.window >= 0) c.window = o.window;
    if (o.seed >= 0) c.seeds = {static_cast<std::uint64_t>(o.seed)};
    if (!o.out.empty()) c.out_dir = o.out;
    return c;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

fs::path prepare_out(const ExperimentConfig& c) {
    fs::path out(c.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory: " + out.string());
    write_text(out / "resolved_config.json", c.to_json().dump(2) + "\n");
    return out;
}

int cmd_gen_scene(const CliOverrides& o) {
    ExperimentConfig c = resolve_config(o);
    if (!c.scene.synthetic)
        throw ConfigError("gen-scene needs a synthetic scene spec in the config");
    const fs::path out = prepare_out(c);
    Scene scene = generate_scene(*c.scene.synthetic);
    const fs::path manifest = save_scene(scene, out / "scene");
    std::cout << manifest.string() << "\n";
    return 0;
}

int cmd_validate(const CliOverrides& o) {
    ExperimentConfig c = resolve_config(o);
    c.validate();
    std::cout << "config ok: " << c.graph.build().n << " agents, scene length "
              << c.scene.build().length() << ", requirement " << c.requirement.str() << "\n";
    return 0;
}

int cmd_train(const CliOverrides& o) {
    ExperimentConfig c = resolve_config(o);
    if (c.train.config.episodes < 1) throw ConfigError("training needs episodes >= 1");
    const fs::path out = prepare_out(c);
    const std::uint64_t seed = c.seeds.front();

    std::vector<Scene> scenes;
    for (const auto& src : c.training_sources()) scenes.push_back(src.build());
    std::vector<const VideoStream*> streams;
    for (const auto& sc : scenes)
        for (const auto& st : sc.streams) streams.push_back(&st);
    if (streams.empty()) throw ConfigError("refusing to train on an empty training set");

    CsvWriter rewards;
    rewards.header({"strategy", "episode", "total_reward"});
    const std::vector<std::pair<StrategySpec, std::string>> specs = {
        {StrategySpec::slow(c.train.slow_actions), "slow"},
        {StrategySpec::normal(c.train.normal_actions), "normal"},
        {StrategySpec::fast(c.train.fast_actions), "fast"},
    };
    const std::vector<std::uint64_t> streams_salt = {0x510, 0x520, 0x530};
    for (std::size_t k = 0; k < specs.size(); ++k) {
        std::vector<double> episode_rewards;
        TrainConfig tc = c.train.config;
        tc.episode_rewards = &episode_rewards;
        QPolicy policy = train_q(streams, specs[k].first, tc, mix_seed(seed, streams_salt[k]));
        policy.save(out / (specs[k].second + ".qpol"));
        for (std::size_t ep = 0; ep < episode_rewards.size(); ++ep)
            rewards.row_strings({specs[k].second, std::to_string(ep),
                                 fmt_double(episode_rewards[ep])});
    }
    rewards.save((out / "train_rewards.csv").string());
    std::cout << "wrote " << (out / "slow.qpol").string() << ", normal.qpol, fast.qpol\n";
    return 0;
}

RunSummary run_once(const ExperimentConfig& c, std::uint64_t seed) {
    const Scene scene = c.scene.build();
    const CommGraph graph = c.graph.build();
    const PolicyBank bank = c.make_policies(seed);
    return run_experiment(scene, graph, bank, c.run_config());
}

int cmd_run(const CliOverrides& o) {
    ExperimentConfig c = resolve_config(o);
    c.validate();
    const fs::path out = prepare_out(c);
    const RunSummary summary = run_once(c, c.seeds.front());
    write_text(out / "summary.csv", summary.summary_csv());
    write_text(out / "ledger.csv", summary.ledger_csv());
    write_text(out / "consensus.csv", summary.consensus_csv());
    std::cout << "coverage " << fmt_double(summary.coverage) << ", processing rate "
              << fmt_double(summary.processing_rate) << ", bytes "
              << summary.ledger.cumulative.bytes_total << "\n";
    return 0;
}

struct SweepRow {
    std::string key;
    double coverage = 0;
    double rate = 0;
    double bytes = 0;
    double iterations = 0;
};

SweepRow aggregate(const std::string& key, const std::vector<RunSummary>& runs) {
    SweepRow row;
    row.key = key;
    for (const auto& r : runs) {
        row.coverage += r.coverage;
        row.rate += r.processing_rate;
        row.bytes += static_cast<double>(r.ledger.cumulative.bytes_total);
        double iters = 0;
        for (const auto& p : r.periods) iters += static_cast<double>(p.consensus_iterations);
        row.iterations += r.periods.empty() ? 0 : iters / static_cast<double>(r.periods.size());
    }
    const double n = static_cast<double>(runs.size());
    row.coverage /= n;
    row.rate /= n;
    row.bytes /= n;
    row.iterations /= n;
    return row;
}

int cmd_sweep(const CliOverrides& o, const std::string& axis) {
    ExperimentConfig c = resolve_config(o);
    c.validate();
    const fs::path out = prepare_out(c);
    const std::size_t n_seeds = c.seeds.size();

    CsvWriter csv;
    CsvWriter tradeoff;

    if (axis == "requirement" || axis == "consensus_variant") {
        std::vector<std::string> labels;
        std::vector<RunSummary> results;
        if (axis == "requirement") {
            std::vector<SystemRequirement> points = c.sweep.requirements;
            if (points.empty())
                points = {{2, 2, 2}, {2, 3, 1}, {3, 2, 1}, {4, 1, 1}, {5, 0, 1}};
            results.resize(points.size() * n_seeds);
            for (const auto& pt : points) labels.push_back(pt.str());
#pragma omp parallel for schedule(dynamic)
            for (int job = 0; job < static_cast<int>(results.size()); ++job) {
                ExperimentConfig local = c;
                local.requirement = points[job / n_seeds];
                results[job] = run_once(local, c.seeds[job % n_seeds]);
            }
        } else {
            std::vector<ConsensusVariant> points = c.sweep.variants;
            if (points.empty()) points = all_consensus_variants();
            results.resize(points.size() * n_seeds);
            for (auto pt : points) labels.push_back(to_string(pt));
#pragma omp parallel for schedule(dynamic)
            for (int job = 0; job < static_cast<int>(results.size()); ++job) {
                ExperimentConfig local = c;
                local.variant = points[job / n_seeds];
                results[job] = run_once(local, c.seeds[job % n_seeds]);
            }
        }
        csv.header({axis, "mean_coverage", "mean_processing_rate", "mean_bytes",
                    "mean_iterations"});
        tradeoff.header({"mean_processing_rate", "mean_coverage"});
        for (std::size_t p = 0; p < labels.size(); ++p) {
            std::vector<RunSummary> group(results.begin() + p * n_seeds,
                                          results.begin() + (p + 1) * n_seeds);
            const SweepRow row = aggregate(labels[p], group);
            csv.row_strings({row.key, fmt_double(row.coverage), fmt_double(row.rate),
                             fmt_double(row.bytes), fmt_double(row.iterations)});
            tradeoff.row_strings({fmt_double(row.rate), fmt_double(row.coverage)});
        }
    } else if (axis == "connectivity_p") {
        std::vector<double> grid = c.sweep.connectivity_p;
        if (grid.empty())
            grid = {0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        const int n_agents = c.graph.n > 0 ? c.graph.n : c.scene.build().n_views();
        struct Job {
            double p;
            std::uint64_t seed;
        };
        std::vector<Job> jobs;
        for (double p : grid)
            for (auto s : c.seeds) jobs.push_back({p, s});
        std::vector<RunSummary> results(jobs.size());
        std::vector<int> edge_counts(jobs.size());
#pragma omp parallel for schedule(dynamic)
        for (int job = 0; job < static_cast<int>(jobs.size()); ++job) {
            ExperimentConfig local = c;
            local.graph.type = "erdos_renyi";
            local.graph.n = n_agents;
            local.graph.p = jobs[job].p;
            local.graph.seed = mix_seed(jobs[job].seed, 0x6E);
            edge_counts[job] = local.graph.build().edge_count();
            results[job] = run_once(local, jobs[job].seed);
        }
        // Results are reported per realized edge count, ascending.
        std::map<int, std::vector<RunSummary>> by_edges;
        for (std::size_t j = 0; j < jobs.size(); ++j)
            by_edges[edge_counts[j]].push_back(results[j]);
        csv.header({"edges", "runs", "mean_coverage", "mean_processing_rate", "mean_bytes",
                    "mean_iterations"});
        tradeoff.header({"edges", "mean_bytes"});
        for (const auto& [edges, group] : by_edges) {
            const SweepRow row = aggregate(std::to_string(edges), group);
            csv.row_strings({row.key, std::to_string(group.size()), fmt_double(row.coverage),
                             fmt_double(row.rate), fmt_double(row.bytes),
                             fmt_double(row.iterations)});
            tradeoff.row_strings({row.key, fmt_double(row.bytes)});
        }
    } else {
        throw ConfigError("unknown sweep axis: " + axis +
                          " (expected requirement|connectivity_p|consensus_variant)");
    }

    csv.save((out / ("sweep_" + axis + ".csv")).string());
    tradeoff.save((out / "tradeoff.csv").string());
    std::cout << "wrote " << (out / ("sweep_" + axis + ".csv")).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus-driven multi-agent video fast-forwarding simulator"};
    app.require_subcommand(1);

    CliOverrides o;
    std::string sweep_axis = "requirement";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "JSON config file");
        cmd->add_option("--scene", o.scene, "scene manifest path (overrides config)");
        cmd->add_option("--graph", o.graph,
                        "graph spec: complete:N | path:N | ring:N | star:N | er:N:P[:SEED]");
        cmd->add_option("--req", o.req, "requirement X/Y/Z (fast/normal/slow counts)");
        cmd->add_option("--consensus", o.consensus, "dmvf|ave|one|dgd|extra");
        cmd->add_option("--period", o.period, "adaptation period length in frames");
        cmd->add_option("--alpha", o.alpha, "frame-similarity scale");
        cmd->add_option("--window", o.window, "coverage window radius");
        cmd->add_option("--seed", o.seed, "use a single seed");
        cmd->add_option("--out", o.out, "output directory");
    };

    auto* gen = app.add_subcommand("gen-scene", "generate and save a synthetic scene");
    add_common(gen);
    auto* train = app.add_subcommand("train", "train the three pace policies");
    add_common(train);
    auto* run = app.add_subcommand("run", "run one experiment");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "sweep an axis and aggregate over seeds");
    add_common(sweep);
    sweep->add_option("--axis", sweep_axis, "requirement|connectivity_p|consensus_variant");
    auto* validate = app.add_subcommand("validate", "validate a config and exit");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_scene(o);
        if (train->parsed()) return cmd_train(o);
        if (run->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep(o, sweep_axis);
        if (validate->parsed()) return cmd_validate(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

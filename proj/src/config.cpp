#include "dmvf/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "dmvf/errors.hpp"
#include "dmvf/rng.hpp"

namespace dmvf {

using nlohmann::json;

Scene SceneSource::build() const {
    if (manifest) return load_scene(*manifest);
    if (synthetic) return generate_scene(*synthetic);
    throw ConfigError("scene source is empty: set 'manifest' or 'synthetic'");
}

CommGraph GraphSpec::build() const {
    if (type == "complete") return CommGraph::complete(n);
    if (type == "path") return CommGraph::path(n);
    if (type == "ring") return CommGraph::ring(n);
    if (type == "star") return CommGraph::star(n);
    if (type == "erdos_renyi") return erdos_renyi(n, p, seed);
    if (type == "explicit") {
        auto g = CommGraph::from_edges(n, edges);
        g.require_connected();
        return g;
    }
    throw ConfigError("unknown graph type: " + type);
}

namespace {

SceneGenParams synthetic_from_json(const json& j) {
    SceneGenParams p;
    p.n_views = j.value("n_views", 1);
    p.length = j.value("length", std::int64_t{0});
    p.dim = j.value("dim", 16);
    p.noise_sigma = j.value("noise_sigma", 0.1);
    p.event_scale = j.value("event_scale", 10.0);
    p.view_offset_scale = j.value("view_offset_scale", 2.0);
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("events")) {
        for (const auto& e : j.at("events")) {
            EventSpec ev;
            ev.start = e.at("start").get<std::int64_t>();
            ev.end = e.at("end").get<std::int64_t>();
            ev.views = e.at("views").get<std::vector<int>>();
            p.events.push_back(std::move(ev));
        }
    }
    if (j.contains("rotating")) {
        const auto& r = j.at("rotating");
        auto evs = rotating_events(p.n_views, p.length, r.value("epoch_len", std::int64_t{300}),
                                   r.value("group_size", 2), r.value("burst_len", std::int64_t{30}),
                                   r.value("burst_gap", std::int64_t{45}));
        p.events.insert(p.events.end(), evs.begin(), evs.end());
    }
    return p;
}

json synthetic_to_json(const SceneGenParams& p) {
    json events = json::array();
    for (const auto& e : p.events)
        events.push_back({{"start", e.start}, {"end", e.end}, {"views", e.views}});
    return {{"n_views", p.n_views},       {"length", p.length},
            {"dim", p.dim},               {"noise_sigma", p.noise_sigma},
            {"event_scale", p.event_scale}, {"view_offset_scale", p.view_offset_scale},
            {"seed", p.seed},             {"events", events}};
}

SceneSource scene_source_from_json(const json& j) {
    SceneSource s;
    if (j.is_string()) {
        s.manifest = j.get<std::string>();
        return s;
    }
    if (j.contains("manifest")) s.manifest = j.at("manifest").get<std::string>();
    if (j.contains("synthetic")) s.synthetic = synthetic_from_json(j.at("synthetic"));
    if (!s.manifest && !s.synthetic)
        throw ConfigError("scene entry needs 'manifest' or 'synthetic'");
    return s;
}

json scene_source_to_json(const SceneSource& s) {
    json j = json::object();
    if (s.manifest) j["manifest"] = *s.manifest;
    if (s.synthetic) j["synthetic"] = synthetic_to_json(*s.synthetic);
    return j;
}

GraphSpec graph_from_json(const json& j) {
    GraphSpec g;
    g.type = j.value("type", std::string("complete"));
    g.n = j.value("n", 0);
    g.p = j.value("p", 0.5);
    g.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("edges"))
        for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(),
                                                                 e.at(1).get<int>());
    return g;
}

json graph_to_json(const GraphSpec& g) {
    json j = {{"type", g.type}, {"n", g.n}};
    if (g.type == "erdos_renyi") {
        j["p"] = g.p;
        j["seed"] = g.seed;
    }
    if (g.type == "explicit") {
        json edges = json::array();
        for (auto [a, b] : g.edges) edges.push_back({a, b});
        j["edges"] = edges;
    }
    return j;
}

SystemRequirement requirement_from_json(const json& j) {
    SystemRequirement r;
    if (j.is_array()) {
        if (j.size() != 3) throw ConfigError("requirement array must be [fast, normal, slow]");
        r.fast = j.at(0).get<int>();
        r.normal = j.at(1).get<int>();
        r.slow = j.at(2).get<int>();
    } else {
        r.fast = j.value("fast", 0);
        r.normal = j.value("normal", 0);
        r.slow = j.value("slow", 0);
    }
    return r;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("scene")) c.scene = scene_source_from_json(j.at("scene"));
    if (j.contains("graph")) c.graph = graph_from_json(j.at("graph"));
    if (j.contains("requirement")) c.requirement = requirement_from_json(j.at("requirement"));
    if (j.contains("consensus"))
        c.variant = consensus_from_string(j.at("consensus").get<std::string>());
    c.period = j.value("period", std::int64_t{100});
    c.alpha = j.value("alpha", 0.05);
    c.window = j.value("window", 4);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("checkpoints")) {
        const auto& cp = j.at("checkpoints");
        if (cp.contains("slow")) c.checkpoint_slow = cp.at("slow").get<std::string>();
        if (cp.contains("normal")) c.checkpoint_normal = cp.at("normal").get<std::string>();
        if (cp.contains("fast")) c.checkpoint_fast = cp.at("fast").get<std::string>();
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (t.contains("scenes"))
            for (const auto& s : t.at("scenes")) c.train.scenes.push_back(scene_source_from_json(s));
        c.train.split = t.value("split", 0.8);
        c.train.config.episodes = t.value("episodes", c.train.config.episodes);
        c.train.config.learning_rate = t.value("learning_rate", c.train.config.learning_rate);
        c.train.config.discount = t.value("discount", c.train.config.discount);
        c.train.config.eps_start = t.value("eps_start", c.train.config.eps_start);
        c.train.config.eps_end = t.value("eps_end", c.train.config.eps_end);
        c.train.config.quantizer_bits = t.value("quantizer_bits", c.train.config.quantizer_bits);
        c.train.config.reward.hit_window = t.value("hit_window", c.train.config.reward.hit_window);
        c.train.config.reward.skip_beta = t.value("skip_beta", c.train.config.reward.skip_beta);
        c.train.slow_actions = t.value("slow_actions", 15);
        c.train.normal_actions = t.value("normal_actions", 25);
        c.train.fast_actions = t.value("fast_actions", 35);
    }
    c.dgd_gamma0 = j.value("dgd_gamma0", 0.5);
    c.extra_alpha = j.value("extra_alpha", 0.1);
    c.stop.tol = j.value("stop_tol", 1e-6);
    c.stop.max_iterations = j.value("max_iterations", std::int64_t{10000});
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.contains("requirements"))
            for (const auto& r : s.at("requirements"))
                c.sweep.requirements.push_back(requirement_from_json(r));
        if (s.contains("connectivity_p"))
            c.sweep.connectivity_p = s.at("connectivity_p").get<std::vector<double>>();
        if (s.contains("variants"))
            for (const auto& v : s.at("variants"))
                c.sweep.variants.push_back(consensus_from_string(v.get<std::string>()));
    }
    c.out_dir = j.value("out", std::string("out"));
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["scene"] = scene_source_to_json(scene);
    j["graph"] = graph_to_json(graph);
    j["requirement"] = {{"fast", requirement.fast},
                        {"normal", requirement.normal},
                        {"slow", requirement.slow}};
    j["consensus"] = to_string(variant);
    j["period"] = period;
    j["alpha"] = alpha;
    j["window"] = window;
    j["seeds"] = seeds;
    if (checkpoint_slow || checkpoint_normal || checkpoint_fast) {
        json cp = json::object();
        if (checkpoint_slow) cp["slow"] = *checkpoint_slow;
        if (checkpoint_normal) cp["normal"] = *checkpoint_normal;
        if (checkpoint_fast) cp["fast"] = *checkpoint_fast;
        j["checkpoints"] = cp;
    }
    json t;
    json scenes = json::array();
    for (const auto& s : train.scenes) scenes.push_back(scene_source_to_json(s));
    t["scenes"] = scenes;
    t["split"] = train.split;
    t["episodes"] = train.config.episodes;
    t["learning_rate"] = train.config.learning_rate;
    t["discount"] = train.config.discount;
    t["eps_start"] = train.config.eps_start;
    t["eps_end"] = train.config.eps_end;
    t["quantizer_bits"] = train.config.quantizer_bits;
    t["hit_window"] = train.config.reward.hit_window;
    t["skip_beta"] = train.config.reward.skip_beta;
    t["slow_actions"] = train.slow_actions;
    t["normal_actions"] = train.normal_actions;
    t["fast_actions"] = train.fast_actions;
    j["train"] = t;
    j["dgd_gamma0"] = dgd_gamma0;
    j["extra_alpha"] = extra_alpha;
    j["stop_tol"] = stop.tol;
    j["max_iterations"] = stop.max_iterations;
    json sw;
    json reqs = json::array();
    for (const auto& r : sweep.requirements) reqs.push_back({r.fast, r.normal, r.slow});
    sw["requirements"] = reqs;
    sw["connectivity_p"] = sweep.connectivity_p;
    json vars = json::array();
    for (auto v : sweep.variants) vars.push_back(to_string(v));
    sw["variants"] = vars;
    j["sweep"] = sw;
    j["out"] = out_dir;
    return j;
}

void ExperimentConfig::validate() const {
    if (period < 1) throw ConfigError("period must be >= 1, got " + std::to_string(period));
    if (!(alpha > 0)) throw ConfigError("alpha must be > 0");
    if (window < 0) throw ConfigError("window must be >= 0");
    if (seeds.empty()) throw ConfigError("need at least one seed");
    if (train.config.episodes < 1) throw ConfigError("training episodes must be >= 1");
    if (!(train.split > 0.0) || train.split > 1.0)
        throw ConfigError("train split must be in (0,1]");

    const CommGraph g = graph.build();  // also checks connectivity for explicit graphs
    g.require_connected();
    requirement.validate(g.n);

    const Scene s = scene.build();
    if (s.n_views() != g.n)
        throw ConfigError("scene has " + std::to_string(s.n_views()) + " views but graph has " +
                          std::to_string(g.n) + " nodes");

    const int named = (checkpoint_slow ? 1 : 0) + (checkpoint_normal ? 1 : 0) +
                      (checkpoint_fast ? 1 : 0);
    if (named != 0 && named != 3)
        throw ConfigError("name all three checkpoints or none");
    for (const auto& cp : {checkpoint_slow, checkpoint_normal, checkpoint_fast})
        if (cp && !std::filesystem::exists(*cp))
            throw ConfigError("checkpoint not found: " + *cp);
}

RunConfig ExperimentConfig::run_config() const {
    RunConfig rc;
    rc.variant = variant;
    rc.requirement = requirement;
    rc.period = period;
    rc.alpha = alpha;
    rc.window = window;
    rc.dgd_gamma0 = dgd_gamma0;
    rc.extra_alpha = extra_alpha;
    rc.stop = stop;
    return rc;
}

std::vector<SceneSource> ExperimentConfig::training_sources() const {
    std::vector<SceneSource> pool = train.scenes;
    if (pool.empty()) pool.push_back(scene);
    if (pool.size() == 1) return pool;
    const std::size_t keep =
        std::max<std::size_t>(1, static_cast<std::size_t>(pool.size() * train.split));
    pool.resize(std::min(pool.size(), keep));
    return pool;
}

PolicyBank ExperimentConfig::make_policies(std::uint64_t seed) const {
    if (checkpoint_slow && checkpoint_normal && checkpoint_fast) {
        PolicyBank bank;
        bank.slow = QPolicy::load(*checkpoint_slow);
        bank.normal = QPolicy::load(*checkpoint_normal);
        bank.fast = QPolicy::load(*checkpoint_fast);
        return bank;
    }
    std::vector<Scene> scenes;
    for (const auto& src : training_sources()) scenes.push_back(src.build());
    std::vector<const VideoStream*> streams;
    for (const auto& sc : scenes)
        for (const auto& st : sc.streams) streams.push_back(&st);
    if (streams.empty()) throw ConfigError("no training streams available");

    PolicyBank bank;
    bank.slow = train_q(streams, StrategySpec::slow(train.slow_actions), train.config,
                        mix_seed(seed, 0x510));
    bank.normal = train_q(streams, StrategySpec::normal(train.normal_actions), train.config,
                          mix_seed(seed, 0x520));
    bank.fast = train_q(streams, StrategySpec::fast(train.fast_actions), train.config,
                        mix_seed(seed, 0x530));
    return bank;
}

}  // namespace dmvf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dmvf/config.hpp"
#include "dmvf/errors.hpp"

using namespace dmvf;
using nlohmann::json;

namespace {

json base_config() {
    return json::parse(R"({
      "scene": {"synthetic": {"n_views": 4, "length": 300, "dim": 8, "seed": 5,
                 "events": [{"start": 20, "end": 60, "views": [0, 1]},
                            {"start": 150, "end": 200, "views": [2, 3]}]}},
      "graph": {"type": "complete", "n": 4},
      "requirement": {"fast": 2, "normal": 1, "slow": 1},
      "consensus": "dmvf",
      "period": 100,
      "alpha": 0.05,
      "window": 4,
      "seeds": [1, 2],
      "train": {"episodes": 4, "quantizer_bits": 5}
    })");
}

}  // namespace

TEST_CASE("config parses, validates, and resolves back to json") {
    auto c = ExperimentConfig::from_json(base_config());
    c.validate();
    CHECK(c.requirement.fast == 2);
    CHECK(c.period == 100);
    CHECK(c.seeds.size() == 2);
    CHECK(c.variant == ConsensusVariant::Dmvf);

    // Resolved copy re-parses to the same semantic config.
    auto round = ExperimentConfig::from_json(c.to_json());
    CHECK(round.to_json() == c.to_json());
    round.validate();
}

TEST_CASE("requirement must match the agent count") {
    auto j = base_config();
    j["requirement"] = {{"fast", 2}, {"normal", 2}, {"slow", 2}};
    auto c = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("scene and graph sizes must agree") {
    auto j = base_config();
    j["graph"]["n"] = 5;
    j["requirement"] = {{"fast", 3}, {"normal", 1}, {"slow", 1}};
    auto c = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("period, alpha, window, and seeds are range-checked") {
    auto j = base_config();
    j["period"] = 0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
    j = base_config();
    j["alpha"] = 0.0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
    j = base_config();
    j["window"] = -1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
    j = base_config();
    j["seeds"] = json::array();
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
}

TEST_CASE("explicit graphs must be connected") {
    auto j = base_config();
    j["graph"] = {{"type", "explicit"},
                  {"n", 4},
                  {"edges", json::array({json::array({0, 1}), json::array({2, 3})})}};
    auto c = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(c.validate(), GraphError);
}

TEST_CASE("unknown consensus name is rejected at parse time") {
    auto j = base_config();
    j["consensus"] = "gossip";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
}

TEST_CASE("checkpoints must exist and come as a full set") {
    auto j = base_config();
    j["checkpoints"] = {{"slow", "/nonexistent/slow.qpol"}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
    j["checkpoints"] = {{"slow", "/nonexistent/s.qpol"},
                        {"normal", "/nonexistent/n.qpol"},
                        {"fast", "/nonexistent/f.qpol"}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j).validate(), ConfigError);
}

TEST_CASE("scene entries accept bare manifest strings") {
    auto j = base_config();
    j["scene"] = "/tmp/does_not_matter/manifest.json";
    auto c = ExperimentConfig::from_json(j);
    REQUIRE(c.scene.manifest.has_value());
    CHECK(*c.scene.manifest == "/tmp/does_not_matter/manifest.json");
}

TEST_CASE("training sources fall back to the eval scene and honor the split") {
    auto c = ExperimentConfig::from_json(base_config());
    auto sources = c.training_sources();
    REQUIRE(sources.size() == 1);
    CHECK(sources[0].synthetic.has_value());

    auto j = base_config();
    json list = json::array();
    for (int k = 0; k < 5; ++k) {
        auto s = j["scene"];
        s["synthetic"]["seed"] = 100 + k;
        list.push_back(s);
    }
    j["train"]["scenes"] = list;
    j["train"]["split"] = 0.8;
    auto c2 = ExperimentConfig::from_json(j);
    CHECK(c2.training_sources().size() == 4);  // leading 80 percent
}

TEST_CASE("rotating recipe expands through the config path") {
    auto j = base_config();
    j["scene"] = {{"synthetic",
                   {{"n_views", 4},
                    {"length", 600},
                    {"dim", 8},
                    {"seed", 9},
                    {"rotating",
                     {{"epoch_len", 150}, {"group_size", 2}, {"burst_len", 20}, {"burst_gap", 30}}}}}};
    auto c = ExperimentConfig::from_json(j);
    REQUIRE(c.scene.synthetic.has_value());
    CHECK_FALSE(c.scene.synthetic->events.empty());
    Scene s = c.scene.build();
    s.validate();
}

TEST_CASE("in-process training produces a usable policy bank") {
    auto c = ExperimentConfig::from_json(base_config());
    auto bank = c.make_policies(11);
    CHECK(bank.slow.spec().kind == StrategyKind::Slow);
    CHECK(bank.normal.spec().action_space == 25);
    CHECK(bank.fast.spec().action_space == 35);
    // Deterministic per seed.
    auto again = c.make_policies(11);
    CHECK(bank.normal.table() == again.normal.table());
}

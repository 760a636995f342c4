#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dmvf/errors.hpp"
#include "dmvf/stream.hpp"

using namespace dmvf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("dmvf_stream_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool scenes_equal(const Scene& a, const Scene& b) {
    if (a.n_views() != b.n_views() || a.length() != b.length() || a.dim() != b.dim()) return false;
    if (a.global_truth != b.global_truth) return false;
    for (int v = 0; v < a.n_views(); ++v) {
        for (std::int64_t t = 0; t < a.length(); ++t) {
            const auto& fa = a.streams[v].frames[t];
            const auto& fb = b.streams[v].frames[t];
            if (fa.index != fb.index || fa.important != fb.important) return false;
            if (fa.feature != fb.feature) return false;  // bitwise
        }
    }
    return true;
}

}  // namespace

TEST_CASE("no events means no importance anywhere") {
    SceneGenParams p;
    p.n_views = 2;
    p.length = 10;
    p.seed = 4;
    Scene s = generate_scene(p);
    for (auto b : s.global_truth) CHECK(b == 0);
    for (const auto& st : s.streams)
        for (const auto& fr : st.frames) CHECK_FALSE(fr.important);
}

TEST_CASE("a single event marks exactly its interval") {
    SceneGenParams p;
    p.n_views = 1;
    p.length = 10;
    p.seed = 4;
    p.events = {{2, 5, {0}}};
    Scene s = generate_scene(p);
    for (std::int64_t t = 0; t < 10; ++t)
        CHECK(s.global_truth[t] == ((t >= 2 && t < 5) ? 1 : 0));
}

TEST_CASE("overlapping events union into the global truth") {
    SceneGenParams p;
    p.n_views = 3;
    p.length = 30;
    p.seed = 9;
    p.events = {{3, 12, {0, 1}}, {8, 20, {1, 2}}};
    Scene s = generate_scene(p);

    // Brute-force union over the event list, independent of the generator.
    std::vector<std::uint8_t> expect(30, 0);
    for (const auto& ev : p.events)
        for (std::int64_t t = ev.start; t < ev.end; ++t) expect[t] = 1;
    for (std::int64_t t = 0; t < 30; ++t) CHECK(s.global_truth[t] == expect[t]);

    // Per-view labels differ from the union where a view is not named.
    CHECK(s.streams[0].frames[15].important == false);
    CHECK(s.streams[1].frames[15].important == true);
    CHECK(s.streams[2].frames[5].important == false);
}

TEST_CASE("generation is deterministic per seed") {
    SceneGenParams p;
    p.n_views = 3;
    p.length = 40;
    p.dim = 8;
    p.seed = 123;
    p.events = {{5, 15, {0, 2}}};
    Scene a = generate_scene(p);
    Scene b = generate_scene(p);
    CHECK(scenes_equal(a, b));
    p.seed = 124;
    Scene c = generate_scene(p);
    CHECK_FALSE(scenes_equal(a, c));
}

TEST_CASE("event validation rejects bad intervals and views") {
    SceneGenParams p;
    p.n_views = 2;
    p.length = 10;
    p.events = {{5, 12, {0}}};
    CHECK_THROWS_AS(generate_scene(p), ConfigError);
    p.events = {{-1, 4, {0}}};
    CHECK_THROWS_AS(generate_scene(p), ConfigError);
    p.events = {{2, 4, {}}};
    CHECK_THROWS_AS(generate_scene(p), ConfigError);
    p.events = {{2, 4, {5}}};
    CHECK_THROWS_AS(generate_scene(p), ConfigError);
}

TEST_CASE("save then load round-trips exactly") {
    SceneGenParams p;
    p.n_views = 6;
    p.length = 25;
    p.dim = 5;
    p.seed = 31;
    p.events = {{2, 9, {0, 3}}, {12, 20, {1, 4, 5}}};
    Scene s = generate_scene(p);
    auto dir = temp_dir("roundtrip");
    auto manifest = save_scene(s, dir);
    Scene loaded = load_scene(manifest);
    CHECK(scenes_equal(s, loaded));
}

TEST_CASE("on-disk layout: one feature and one label file per view") {
    SceneGenParams p;
    p.n_views = 6;
    p.length = 12;
    p.dim = 3;
    p.seed = 7;
    Scene s = generate_scene(p);
    auto dir = temp_dir("layout");
    save_scene(s, dir);
    int f32 = 0, lab = 0, manifests = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (ext == ".f32") ++f32;
        if (ext == ".lab") ++lab;
        if (e.path().filename() == "manifest.json") ++manifests;
    }
    CHECK(f32 == 6);
    CHECK(lab == 7);  // six views + the global file
    CHECK(manifests == 1);
    // Format arithmetic: L*D float32 scalars, one label byte per frame.
    CHECK(fs::file_size(dir / "v0.f32") == 12 * 3 * 4);
    CHECK(fs::file_size(dir / "v0.lab") == 12);
    CHECK(fs::file_size(dir / "global.lab") == 12);
}

TEST_CASE("truncated feature file is reported as truncation") {
    SceneGenParams p;
    p.n_views = 1;
    p.length = 10;
    p.dim = 4;
    p.seed = 1;
    Scene s = generate_scene(p);
    auto dir = temp_dir("trunc");
    auto manifest = save_scene(s, dir);
    fs::resize_file(dir / "v0.f32", 10 * 4 * 4 - 6);  // cut mid-frame
    CHECK_THROWS_AS(load_scene(manifest), TruncatedFileError);
}

TEST_CASE("feature file written at a different dim is a dimension mismatch") {
    SceneGenParams p;
    p.n_views = 1;
    p.length = 10;
    p.dim = 3;
    p.seed = 1;
    Scene s = generate_scene(p);
    auto dir = temp_dir("dim");
    auto manifest = save_scene(s, dir);
    // Rewrite the manifest to claim dim 4 over a file holding L*3 scalars.
    nlohmann::json j;
    {
        std::ifstream in(manifest);
        in >> j;
    }
    j["dim"] = 4;
    {
        std::ofstream out(manifest);
        out << j.dump(2);
    }
    CHECK_THROWS_AS(load_scene(manifest), DimensionMismatchError);
}

TEST_CASE("label count mismatch is its own error") {
    SceneGenParams p;
    p.n_views = 1;
    p.length = 10;
    p.dim = 2;
    p.seed = 1;
    Scene s = generate_scene(p);
    auto dir = temp_dir("labels");
    auto manifest = save_scene(s, dir);
    fs::resize_file(dir / "v0.lab", 7);
    CHECK_THROWS_AS(load_scene(manifest), CountMismatchError);
}

TEST_CASE("missing file surfaces the offending path") {
    SceneGenParams p;
    p.n_views = 1;
    p.length = 5;
    p.dim = 2;
    p.seed = 1;
    Scene s = generate_scene(p);
    auto dir = temp_dir("missing");
    auto manifest = save_scene(s, dir);
    fs::remove(dir / "v0.f32");
    try {
        load_scene(manifest);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("v0.f32") != std::string::npos);
    }
}

TEST_CASE("rotating recipe stays in range and rotates the active group") {
    auto events = rotating_events(6, 1200, 300, 2, 30, 45);
    CHECK_FALSE(events.empty());
    for (const auto& ev : events) {
        CHECK(ev.start >= 0);
        CHECK(ev.end <= 1200);
        CHECK(ev.start < ev.end);
        CHECK_FALSE(ev.views.empty());
        for (int v : ev.views) CHECK(v < 6);
    }
    // Different epochs involve different view groups.
    CHECK(events.front().views != events.back().views);
    // The recipe feeds the generator cleanly.
    SceneGenParams p;
    p.n_views = 6;
    p.length = 1200;
    p.seed = 77;
    p.events = events;
    Scene s = generate_scene(p);
    s.validate();
}

#include "dmvf/stream.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dmvf/errors.hpp"
#include "dmvf/rng.hpp"

namespace dmvf {

namespace fs = std::filesystem;
using nlohmann::json;

void Scene::validate() const {
    const std::int64_t L = length();
    const int D = dim();
    if (static_cast<std::int64_t>(global_truth.size()) != L)
        throw CountMismatchError("global_truth length " + std::to_string(global_truth.size()) +
                                 " != stream length " + std::to_string(L));
    for (const auto& s : streams) {
        if (s.length() != L)
            throw CountMismatchError("view " + std::to_string(s.view_id) + " has " +
                                     std::to_string(s.length()) + " frames, expected " +
                                     std::to_string(L));
        if (s.dim != D)
            throw DimensionMismatchError("view " + std::to_string(s.view_id) + " dim " +
                                         std::to_string(s.dim) + " != scene dim " +
                                         std::to_string(D));
        for (std::int64_t t = 0; t < L; ++t) {
            if (s.frames[t].index != t)
                throw CountMismatchError("view " + std::to_string(s.view_id) +
                                         ": frame index not consecutive at t=" + std::to_string(t));
            if (static_cast<int>(s.frames[t].feature.size()) != D)
                throw DimensionMismatchError("view " + std::to_string(s.view_id) +
                                             ": feature dim wrong at t=" + std::to_string(t));
        }
    }
    for (std::int64_t t = 0; t < L; ++t) {
        bool any = false;
        for (const auto& s : streams) any = any || s.frames[t].important;
        if (any != (global_truth[t] != 0))
            throw CountMismatchError("global_truth differs from per-view OR at t=" +
                                     std::to_string(t));
    }
}

Scene generate_scene(const SceneGenParams& p) {
    if (p.n_views < 1) throw ConfigError("generate_scene: n_views must be >= 1");
    if (p.length < 0) throw ConfigError("generate_scene: negative length");
    if (p.dim < 1) throw ConfigError("generate_scene: dim must be >= 1");
    for (std::size_t e = 0; e < p.events.size(); ++e) {
        const auto& ev = p.events[e];
        if (ev.start < 0 || ev.end > p.length || ev.start >= ev.end)
            throw ConfigError("event " + std::to_string(e) + " interval [" +
                              std::to_string(ev.start) + "," + std::to_string(ev.end) +
                              ") outside [0," + std::to_string(p.length) + ")");
        if (ev.views.empty())
            throw ConfigError("event " + std::to_string(e) + " names no views");
        for (int v : ev.views)
            if (v < 0 || v >= p.n_views)
                throw ConfigError("event " + std::to_string(e) + " names view " +
                                  std::to_string(v) + " outside [0," +
                                  std::to_string(p.n_views) + ")");
    }

    std::normal_distribution<double> gauss(0.0, 1.0);

    // Per-view base offsets.
    std::vector<std::vector<double>> base(p.n_views, std::vector<double>(p.dim));
    {
        auto rng = make_rng(p.seed, 0xB00);
        for (auto& b : base)
            for (auto& x : b) x = p.view_offset_scale * gauss(rng);
    }
    // One shared latent direction per event.
    std::vector<std::vector<double>> dir(p.events.size(), std::vector<double>(p.dim));
    {
        auto rng = make_rng(p.seed, 0xE00);
        for (auto& d : dir)
            for (auto& x : d) x = p.event_scale * gauss(rng);
    }

    Scene scene;
    scene.streams.resize(p.n_views);
    scene.global_truth.assign(p.length, 0);
    for (int v = 0; v < p.n_views; ++v) {
        auto& stream = scene.streams[v];
        stream.view_id = v;
        stream.dim = p.dim;
        stream.frames.resize(p.length);
        auto rng = make_rng(p.seed, 0xF00 + static_cast<std::uint64_t>(v));
        for (std::int64_t t = 0; t < p.length; ++t) {
            auto& fr = stream.frames[t];
            fr.index = t;
            fr.feature.resize(p.dim);
            for (int d = 0; d < p.dim; ++d)
                fr.feature[d] = static_cast<float>(base[v][d] + p.noise_sigma * gauss(rng));
        }
        for (std::size_t e = 0; e < p.events.size(); ++e) {
            const auto& ev = p.events[e];
            if (std::find(ev.views.begin(), ev.views.end(), v) == ev.views.end()) continue;
            for (std::int64_t t = ev.start; t < ev.end; ++t) {
                auto& fr = stream.frames[t];
                fr.important = true;
                for (int d = 0; d < p.dim; ++d)
                    fr.feature[d] += static_cast<float>(dir[e][d]);
            }
        }
    }
    for (const auto& s : scene.streams)
        for (std::int64_t t = 0; t < p.length; ++t)
            if (s.frames[t].important) scene.global_truth[t] = 1;

    scene.validate();
    return scene;
}

namespace {

void write_features(const fs::path& path, const VideoStream& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    for (const auto& fr : s.frames)
        f.write(reinterpret_cast<const char*>(fr.feature.data()),
                static_cast<std::streamsize>(fr.feature.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + path.string());
}

void write_labels(const fs::path& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

fs::path save_scene(const Scene& scene, const fs::path& dir) {
    scene.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());

    json views = json::array();
    for (const auto& s : scene.streams) {
        const std::string fname = "v" + std::to_string(s.view_id) + ".f32";
        const std::string lname = "v" + std::to_string(s.view_id) + ".lab";
        write_features(dir / fname, s);
        std::vector<std::uint8_t> labels(s.frames.size());
        for (std::size_t t = 0; t < s.frames.size(); ++t)
            labels[t] = s.frames[t].important ? 1 : 0;
        write_labels(dir / lname, labels);
        views.push_back({{"view_id", s.view_id}, {"features", fname}, {"labels", lname}});
    }
    write_labels(dir / "global.lab", scene.global_truth);

    json manifest = {{"n_views", scene.n_views()},
                     {"length", scene.length()},
                     {"dim", scene.dim()},
                     {"views", views},
                     {"global_truth", "global.lab"}};
    const fs::path mpath = dir / "manifest.json";
    std::ofstream mf(mpath, std::ios::binary);
    if (!mf) throw IoError("cannot open for writing: " + mpath.string());
    mf << manifest.dump(2) << '\n';
    if (!mf) throw IoError("write failed: " + mpath.string());
    return mpath;
}

Scene load_scene(const fs::path& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw IoError("cannot open: " + manifest_path.string());
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw FormatError("bad manifest " + manifest_path.string() + ": " + e.what());
    }

    const fs::path dir = manifest_path.parent_path();
    const int n_views = manifest.at("n_views").get<int>();
    const std::int64_t length = manifest.at("length").get<std::int64_t>();
    const int dim = manifest.at("dim").get<int>();
    const auto& views = manifest.at("views");
    if (static_cast<int>(views.size()) != n_views)
        throw CountMismatchError("manifest lists " + std::to_string(views.size()) +
                                 " views but declares n_views=" + std::to_string(n_views));

    Scene scene;
    scene.streams.resize(n_views);
    for (const auto& v : views) {
        const int id = v.at("view_id").get<int>();
        if (id < 0 || id >= n_views)
            throw FormatError("view_id " + std::to_string(id) + " outside [0," +
                              std::to_string(n_views) + ")");
        auto& stream = scene.streams[id];
        stream.view_id = id;
        stream.dim = dim;

        const fs::path fpath = dir / v.at("features").get<std::string>();
        auto fbytes = read_bytes(fpath);
        const std::size_t want = static_cast<std::size_t>(length) * dim * sizeof(float);
        if (fbytes.size() != want) {
            const std::size_t frame_bytes = static_cast<std::size_t>(length) * sizeof(float);
            // A clean multiple of L scalars means the file was written with a
            // different dim; anything else is a cut-off file.
            if (length > 0 && fbytes.size() % frame_bytes == 0)
                throw DimensionMismatchError(
                    "feature file " + fpath.string() + " holds " +
                    std::to_string(fbytes.size() / sizeof(float)) + " scalars (dim " +
                    std::to_string(fbytes.size() / frame_bytes) + "), manifest declares dim=" +
                    std::to_string(dim));
            throw TruncatedFileError("feature file " + fpath.string() + " holds " +
                                     std::to_string(fbytes.size() / sizeof(float)) +
                                     " scalars, expected " + std::to_string(length * dim));
        }

        const fs::path lpath = dir / v.at("labels").get<std::string>();
        auto labels = read_bytes(lpath);
        if (static_cast<std::int64_t>(labels.size()) != length)
            throw CountMismatchError("label file " + lpath.string() + " holds " +
                                     std::to_string(labels.size()) + " bytes, expected " +
                                     std::to_string(length));

        stream.frames.resize(length);
        for (std::int64_t t = 0; t < length; ++t) {
            auto& fr = stream.frames[t];
            fr.index = t;
            fr.feature.resize(dim);
            std::memcpy(fr.feature.data(), fbytes.data() + t * dim * sizeof(float),
                        dim * sizeof(float));
            fr.important = labels[t] != 0;
        }
    }

    const fs::path gpath = dir / manifest.at("global_truth").get<std::string>();
    scene.global_truth = read_bytes(gpath);
    if (static_cast<std::int64_t>(scene.global_truth.size()) != length)
        throw CountMismatchError("global label file " + gpath.string() + " holds " +
                                 std::to_string(scene.global_truth.size()) +
                                 " bytes, expected " + std::to_string(length));

    scene.validate();
    return scene;
}

std::vector<EventSpec> rotating_events(int n_views, std::int64_t length, std::int64_t epoch_len,
                                       int group_size, std::int64_t burst_len,
                                       std::int64_t burst_gap) {
    if (n_views < 1 || epoch_len < 1 || group_size < 1 || burst_len < 1 || burst_gap < 0)
        throw ConfigError("rotating_events: all sizes must be positive");
    std::vector<EventSpec> events;
    std::int64_t epoch = 0;
    for (std::int64_t start = 0; start < length; start += epoch_len, ++epoch) {
        std::vector<int> group;
        for (int k = 0; k < std::min(group_size, n_views); ++k)
            group.push_back(static_cast<int>((epoch + k) % n_views));
        std::sort(group.begin(), group.end());
        group.erase(std::unique(group.begin(), group.end()), group.end());
        const std::int64_t stop = std::min(start + epoch_len, length);
        for (std::int64_t b = start + burst_gap; b + burst_len <= stop; b += burst_len + burst_gap)
            events.push_back(EventSpec{b, b + burst_len, group});
    }
    return events;
}

}  // namespace dmvf

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dmvf {

struct FrameRecord {
    std::int64_t index = 0;
    std::vector<float> feature;
    bool important = false;
};

struct VideoStream {
    int view_id = 0;
    int dim = 0;
    std::vector<FrameRecord> frames;

    std::int64_t length() const { return static_cast<std::int64_t>(frames.size()); }
    std::span<const float> feature_at(std::int64_t t) const { return frames.at(t).feature; }
};

/// Synchronized multi-view feature streams plus the per-frame union of the
/// per-view importance labels. Immutable after construction; safe to share
/// read-only across threads.
struct Scene {
    std::vector<VideoStream> streams;
    std::vector<std::uint8_t> global_truth;  // 0/1 per frame

    int n_views() const { return static_cast<int>(streams.size()); }
    std::int64_t length() const { return streams.empty() ? 0 : streams.front().length(); }
    int dim() const { return streams.empty() ? 0 : streams.front().dim; }

    /// Checks synchronization (equal lengths, declared dim everywhere,
    /// indices 0..L-1) and that global_truth is the OR of per-view labels.
    void validate() const;
};

struct EventSpec {
    std::int64_t start = 0;  // inclusive
    std::int64_t end = 0;    // exclusive
    std::vector<int> views;
};

struct SceneGenParams {
    int n_views = 1;
    std::int64_t length = 0;
    int dim = 16;
    std::vector<EventSpec> events;
    double noise_sigma = 0.1;
    // Feature geometry: each view gets a base offset, each event a shared
    // latent direction added to the named views while it is active.
    double event_scale = 10.0;
    double view_offset_scale = 2.0;
    std::uint64_t seed = 0;
};

/// Deterministic synthetic scene: per-view base offset + shared event
/// directions + i.i.d. Gaussian noise. Frames inside an event interval are
/// labeled important in exactly the views the event names.
Scene generate_scene(const SceneGenParams& params);

/// Writes manifest.json plus one .f32 feature file (little-endian float32,
/// frame-major) and one .lab label file (one byte per frame) per view, and
/// global.lab. Returns the manifest path.
std::filesystem::path save_scene(const Scene& scene, const std::filesystem::path& dir);

Scene load_scene(const std::filesystem::path& manifest_path);

/// Demo/experiment recipe: activity rotates around the views. Time is cut
/// into epochs; during each epoch a contiguous group of `group_size` views
/// (starting at epoch % n_views) shares a few event bursts while the rest
/// stay idle.
std::vector<EventSpec> rotating_events(int n_views, std::int64_t length, std::int64_t epoch_len,
                                       int group_size, std::int64_t burst_len,
                                       std::int64_t burst_gap);

}  // namespace dmvf

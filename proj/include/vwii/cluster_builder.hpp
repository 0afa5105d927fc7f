#pragma once

// Groups a video's frames into visually similar frame clusters and builds
// each cluster's visual-word document.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vwii/bovw.hpp"
#include "vwii/error.hpp"
#include "vwii/feature_model.hpp"

namespace vwii {

struct FrameRef {
    std::uint32_t video_id = 0;
    std::uint32_t frame_index = 0;
    double timestamp = 0.0;

    friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

struct Frame {
    FrameRef ref;
    FeatureVector features;
};

struct FrameCluster {
    std::uint32_t video_id = 0;
    std::uint32_t cluster_id = 0;
    /// Ascending frame_index.
    std::vector<FrameRef> members;
    WeightedWordDoc doc;
};

inline constexpr std::size_t kFramesPerCluster = 20;
inline constexpr std::size_t kMaxClustersPerVideo = 64;

/// ceil(n / 20), capped at 64.
inline std::size_t default_clusters_per_video(std::size_t n_frames) {
    const std::size_t k = (n_frames + kFramesPerCluster - 1) / kFramesPerCluster;
    return std::clamp<std::size_t>(k, 1, kMaxClustersPerVideo);
}

/// Partitions one video's frames with k-means (k clamped to the frame
/// count). Cluster ids follow the smallest member frame_index. The returned
/// clusters carry members only; their docs are filled in by `cluster_doc`.
inline std::vector<FrameCluster> cluster_frames(std::uint32_t video_id, std::span<const Frame> frames,
                                                std::size_t k_v, std::uint64_t seed,
                                                std::size_t max_iters = 100, double tol = 1e-4) {
    if (frames.empty()) throw InvalidArgument("cluster_frames: video has no frames");
    if (k_v < 1) throw InvalidArgument("cluster_frames: k_v must be at least 1");

    std::set<std::uint32_t> indices;
    for (const auto& f : frames) {
        if (f.ref.video_id != video_id)
            throw InvalidArgument("cluster_frames: frame of video " + std::to_string(f.ref.video_id) +
                                  " passed for video " + std::to_string(video_id));
        if (!indices.insert(f.ref.frame_index).second)
            throw InvalidArgument("cluster_frames: duplicate frame_index " +
                                  std::to_string(f.ref.frame_index));
        if (!(f.ref.timestamp >= 0.0))
            throw InvalidArgument("cluster_frames: negative timestamp");
    }

    std::vector<FeatureVector> points;
    points.reserve(frames.size());
    for (const auto& f : frames) points.push_back(f.features);

    const std::size_t k = std::min(k_v, frames.size());
    auto fit = kmeans_fit(points, KMeansParams{k, seed, max_iters, tol});

    std::map<std::size_t, std::vector<FrameRef>> groups;
    for (std::size_t i = 0; i < frames.size(); ++i) groups[fit.labels[i]].push_back(frames[i].ref);

    std::vector<std::vector<FrameRef>> ordered;
    for (auto& [_, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const FrameRef& a, const FrameRef& b) { return a.frame_index < b.frame_index; });
        ordered.push_back(std::move(members));
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.front().frame_index < b.front().frame_index; });

    std::vector<FrameCluster> out;
    out.reserve(ordered.size());
    for (std::size_t c = 0; c < ordered.size(); ++c)
        out.push_back(FrameCluster{video_id, static_cast<std::uint32_t>(c), std::move(ordered[c]), {}});
    return out;
}

/// Word set is the union of the members' sets; a word's tf is the number of
/// member frames that contain it.
inline WeightedWordDoc cluster_doc(std::span<const VisualWordSet> member_words,
                                   const CorpusStats& stats, WeightingMode mode) {
    if (member_words.empty()) throw InvalidArgument("cluster_doc: cluster has no members");
    VisualWordSet merged;
    for (const auto& frame : member_words)
        for (const auto& [w, _] : frame) merged.add(w, 1);
    return weigh_doc(merged, stats, mode);
}

}  // namespace vwii

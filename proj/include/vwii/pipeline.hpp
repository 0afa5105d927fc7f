#pragma once

// End-to-end corpus ingestion: feature files -> dictionary -> visual words ->
// corpus statistics -> frame clusters -> index. Also the matching query-side
// preparation.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vwii/bovw.hpp"
#include "vwii/cluster_builder.hpp"
#include "vwii/error.hpp"
#include "vwii/feature_file.hpp"
#include "vwii/manifest.hpp"
#include "vwii/vwii_index.hpp"

namespace vwii {

struct BuildConfig {
    std::size_t dict_size = 256;
    std::size_t words_per_frame = 5;
    /// Clusters per video; nullopt selects `default_clusters_per_video`.
    std::optional<std::size_t> clusters_per_video;
    WeightingMode mode = WeightingMode::per_document;
    std::uint64_t seed = 42;
    std::size_t max_iters = 100;
    double tol = 1e-4;
};

struct BuildSummary {
    std::size_t videos = 0;
    std::size_t frames = 0;
    std::size_t docs = 0;
    std::size_t words = 0;
};

struct BuiltIndex {
    VwiiIndex index;
    BuildSummary summary;
};

/// Frames grouped by video id, each group sorted by frame_index.
inline std::map<std::uint32_t, std::vector<Frame>> collect_frames(std::span<const FeatureFile> files) {
    std::map<std::uint32_t, std::vector<Frame>> videos;
    std::optional<std::uint32_t> dim;
    for (const auto& f : files) {
        if (dim && *dim != f.dim)
            throw InvalidArgument("feature files disagree on dim (" + std::to_string(*dim) + " vs " +
                                  std::to_string(f.dim) + ")");
        dim = f.dim;
        for (const auto& r : f.records)
            videos[r.video_id].push_back({{r.video_id, r.frame_index, r.timestamp}, r.to_vector()});
    }
    for (auto& [vid, frames] : videos) {
        std::sort(frames.begin(), frames.end(),
                  [](const Frame& a, const Frame& b) { return a.ref.frame_index < b.ref.frame_index; });
        for (std::size_t i = 1; i < frames.size(); ++i)
            if (frames[i].ref.frame_index == frames[i - 1].ref.frame_index)
                throw InvalidArgument("video " + std::to_string(vid) + " repeats frame_index " +
                                      std::to_string(frames[i].ref.frame_index));
    }
    return videos;
}

/// Mixes the corpus seed with a video id so each video clusters independently.
inline std::uint64_t video_seed(std::uint64_t seed, std::uint32_t video_id) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(video_id) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline BuiltIndex build_corpus_index(std::span<const FeatureFile> files, const Manifest& manifest,
                                     const BuildConfig& cfg) {
    auto videos = collect_frames(files);

    std::vector<std::uint32_t> missing;
    for (const auto& [vid, _] : videos)
        if (!manifest.videos.contains(vid)) missing.push_back(vid);
    if (!missing.empty()) {
        std::string ids;
        for (auto id : missing) ids += (ids.empty() ? "" : ",") + std::to_string(id);
        throw FormatError(FormatErrc::invalid_content, 0, "manifest has no entry for video ids " + ids);
    }

    std::vector<FeatureVector> all;
    for (const auto& [_, frames] : videos)
        for (const auto& f : frames) all.push_back(f.features);
    if (all.empty()) throw InvalidArgument("build: the feature files hold no frames");

    Dictionary dict = build_dictionary(all, cfg.dict_size, cfg.seed, cfg.max_iters, cfg.tol);

    std::map<std::uint32_t, std::vector<VisualWordSet>> words;
    CorpusStats stats;
    for (const auto& [vid, frames] : videos) {
        auto& ws = words[vid];
        for (const auto& f : frames) {
            ws.push_back(quantize(f.features, dict, cfg.words_per_frame));
            stats.add(ws.back());
        }
    }
    // Every dictionary word gets a doc_freq slot even if no frame uses it.
    if (stats.doc_freq.size() < dict.size()) stats.doc_freq.resize(dict.size(), 0);

    std::vector<FrameCluster> clusters;
    for (const auto& [vid, frames] : videos) {
        const std::size_t k_v = cfg.clusters_per_video.value_or(default_clusters_per_video(frames.size()));
        auto vc = cluster_frames(vid, frames, k_v, video_seed(cfg.seed, vid), cfg.max_iters, cfg.tol);

        std::map<std::uint32_t, std::size_t> pos_of;
        for (std::size_t i = 0; i < frames.size(); ++i) pos_of[frames[i].ref.frame_index] = i;
        for (auto& c : vc) {
            std::vector<VisualWordSet> member_words;
            for (const auto& m : c.members) member_words.push_back(words[vid][pos_of.at(m.frame_index)]);
            c.doc = cluster_doc(member_words, stats, cfg.mode);
            clusters.push_back(std::move(c));
        }
    }

    VwiiIndex::BuildOptions opts;
    opts.mode = cfg.mode;
    opts.words_per_frame = static_cast<std::uint32_t>(cfg.words_per_frame);
    for (const auto& [vid, _] : videos) opts.video_names[vid] = manifest.videos.at(vid);

    BuiltIndex out;
    out.index = VwiiIndex::build(clusters, std::move(dict), std::move(stats), std::move(opts));
    out.summary = {videos.size(), all.size(), out.index.doc_count(), out.index.word_count()};
    return out;
}

/// Quantizes and weighs a query image against an index's dictionary and statistics.
inline WeightedWordDoc make_query_doc(const VwiiIndex& index, FeatureView features) {
    if (features.size() != index.dictionary().dim())
        throw InvalidArgument("query dim " + std::to_string(features.size()) +
                              " does not match index dim " + std::to_string(index.dictionary().dim()));
    if (!all_finite(features)) throw InvalidArgument("query features are not finite");
    const auto words = quantize(features, index.dictionary(), index.words_per_frame());
    return weigh_doc(words, index.stats(), index.mode());
}

}  // namespace vwii

// Builds an index over a small synthetic scene corpus in memory and runs one
// planted query through both the threshold search and the brute-force scan.

#include <iostream>

#include "vwii/synthetic.hpp"
#include "vwii/vwii.hpp"

int main() {
    using namespace vwii;

    synth::SceneCorpusConfig scene;
    scene.videos = 8;
    scene.frames_per_video = 30;
    scene.planted_queries = 1;
    const auto corpus = synth::make_scene_corpus(scene);

    Manifest manifest;
    manifest.model = "synthetic-gaussian";
    for (std::uint32_t v = 0; v < scene.videos; ++v) manifest.videos[v] = "clip_" + std::to_string(v);

    BuildConfig cfg;
    cfg.dict_size = 64;
    const auto built = build_corpus_index(corpus.videos, manifest, cfg);
    std::cout << "indexed " << built.summary.videos << " videos, " << built.summary.docs << " cluster docs, "
              << built.summary.words << " distinct words\n";

    const auto& planted = corpus.queries.front();
    QuerySpec q{make_query_doc(built.index, planted.file.records.front().to_vector()), 3, 8, std::nullopt};

    const auto fast = topk_videos(built.index, q);
    const auto exact = brute_force_videos(built.index, q);
    std::cout << "query planted from " << built.index.video_name(planted.video_id) << "\n";
    for (const auto& hit : fast.videos)
        std::cout << "  " << built.index.video_name(hit.video_id) << "  score " << hit.score << "\n";
    std::cout << "full scores: threshold " << fast.stats.full_scores_computed << ", brute force "
              << exact.stats.full_scores_computed << "\n";
}

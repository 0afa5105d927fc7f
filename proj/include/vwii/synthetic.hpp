#pragma once

// Seeded synthetic workloads: Zipf-worded cluster documents for search
// experiments, and Gaussian scene corpora in feature space for end-to-end
// runs.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "vwii/bovw.hpp"
#include "vwii/cluster_builder.hpp"
#include "vwii/feature_file.hpp"
#include "vwii/vwii_index.hpp"

namespace vwii::synth {

/// Documents drawn from topics: each topic is a fixed set of words sampled
/// by Zipf rank, a document keeps each of its topic's words with
/// `topic_keep` probability (tf uniform in [1, max_tf]) and adds
/// `noise_words` Zipf-sampled words.
struct ZipfCorpusConfig {
    std::size_t n_docs = 10'000;
    std::size_t dict_size = 1'024;
    std::size_t n_topics = 500;
    std::size_t topic_words = 20;
    double topic_keep = 0.8;
    std::size_t noise_words = 5;
    std::uint32_t max_tf = 3;
    double zipf_exponent = 1.0;
    std::size_t docs_per_video = 5;
    WeightingMode mode = WeightingMode::per_document;
    std::uint64_t seed = 1;
};

struct ZipfCorpus {
    ZipfCorpusConfig config;
    std::vector<std::vector<WordId>> topics;
    VwiiIndex index;
};

class ZipfSampler {
public:
    ZipfSampler(std::size_t vocab, double exponent) {
        std::vector<double> w(vocab);
        for (std::size_t r = 0; r < vocab; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }

    WordId operator()(std::mt19937_64& rng) { return static_cast<WordId>(dist_(rng)); }

private:
    std::discrete_distribution<std::size_t> dist_;
};

/// A dictionary of `size` one-dimensional placeholder centroids, for corpora
/// that are generated directly in word space.
inline Dictionary placeholder_dictionary(std::size_t size) {
    Dictionary d;
    d.centroids.dim = 1;
    for (std::size_t i = 0; i < size; ++i) d.centroids.vectors.push_back({static_cast<double>(i)});
    return d;
}

inline ZipfCorpus make_zipf_corpus(const ZipfCorpusConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    ZipfSampler zipf(cfg.dict_size, cfg.zipf_exponent);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> tf_dist(1, cfg.max_tf);

    ZipfCorpus out;
    out.config = cfg;
    for (std::size_t t = 0; t < cfg.n_topics; ++t) {
        std::vector<WordId> words;
        while (words.size() < std::min(cfg.topic_words, cfg.dict_size)) {
            const WordId w = zipf(rng);
            if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
        }
        out.topics.push_back(std::move(words));
    }

    std::vector<VisualWordSet> bags(cfg.n_docs);
    for (std::size_t d = 0; d < cfg.n_docs; ++d) {
        const auto& topic = out.topics[d % cfg.n_topics];
        for (WordId w : topic)
            if (coin(rng) < cfg.topic_keep) bags[d].add(w, tf_dist(rng));
        for (std::size_t i = 0; i < cfg.noise_words; ++i) bags[d].add(zipf(rng));
    }

    // Each document stands in for one frame when counting document frequency.
    const CorpusStats stats = accumulate_stats(bags);
    std::vector<FrameCluster> clusters;
    clusters.reserve(cfg.n_docs);
    for (std::size_t d = 0; d < cfg.n_docs; ++d) {
        FrameCluster c;
        c.video_id = static_cast<std::uint32_t>(d / cfg.docs_per_video);
        c.cluster_id = static_cast<std::uint32_t>(d % cfg.docs_per_video);
        c.members.push_back({c.video_id, c.cluster_id, 0.0});
        c.doc = weigh_doc(bags[d], stats, cfg.mode);
        clusters.push_back(std::move(c));
    }
    VwiiIndex::BuildOptions opts;
    opts.mode = cfg.mode;
    out.index = VwiiIndex::build(clusters, placeholder_dictionary(cfg.dict_size), stats, opts);
    return out;
}

/// A query on a random topic: `n_words` of the topic's words (padded with
/// Zipf-sampled words when the topic is smaller), tf uniform in [1, max_tf].
inline WeightedWordDoc make_zipf_query(const ZipfCorpus& corpus, std::size_t n_words, std::mt19937_64& rng) {
    const auto& cfg = corpus.config;
    ZipfSampler zipf(cfg.dict_size, cfg.zipf_exponent);
    std::uniform_int_distribution<std::size_t> topic_dist(0, corpus.topics.size() - 1);
    std::uniform_int_distribution<std::uint32_t> tf_dist(1, cfg.max_tf);

    const auto& topic = corpus.topics[topic_dist(rng)];
    VisualWordSet bag;
    for (WordId w : topic) {
        if (bag.size() == n_words) break;
        bag.add(w, tf_dist(rng));
    }
    while (bag.size() < std::min(n_words, cfg.dict_size)) {
        const WordId w = zipf(rng);
        if (!bag.contains(w)) bag.add(w, tf_dist(rng));
    }
    return weigh_doc(bag, corpus.index.stats(), cfg.mode);
}

/// Gaussian scene corpus in feature space. Every video owns `scenes`
/// prototypes; its frames walk through them in contiguous segments and each
/// frame is its prototype plus isotropic noise. Planted queries are noisy
/// copies of randomly chosen frames.
struct SceneCorpusConfig {
    std::size_t videos = 10;
    std::size_t frames_per_video = 60;
    std::size_t scenes = 3;
    std::size_t dim = 32;
    std::size_t planted_queries = 50;
    double noise = 0.05;
    double frame_interval = 1.0;
    std::uint64_t seed = 1;
};

struct PlantedQuery {
    FeatureFile file;
    std::uint32_t video_id;
    std::uint32_t frame_index;
};

struct SceneCorpus {
    /// One feature file per video.
    std::vector<FeatureFile> videos;
    std::vector<PlantedQuery> queries;
};

inline SceneCorpus make_scene_corpus(const SceneCorpusConfig& cfg) {
    if (cfg.videos < 1 || cfg.frames_per_video < 1 || cfg.scenes < 1 || cfg.dim < 1)
        throw InvalidArgument("scene corpus: all counts must be at least 1");
    if (!(cfg.noise >= 0.0)) throw InvalidArgument("scene corpus: noise must be non-negative");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    SceneCorpus out;
    std::vector<std::vector<FeatureVector>> prototypes(cfg.videos);
    for (auto& video : prototypes) {
        video.resize(cfg.scenes, FeatureVector(cfg.dim));
        for (auto& p : video)
            for (auto& x : p) x = unit(rng);
    }

    auto perturb = [&](const std::vector<float>& base) {
        std::vector<float> v(base);
        if (cfg.noise > 0.0)
            for (auto& x : v) x = static_cast<float>(x + cfg.noise * unit(rng));
        return v;
    };

    for (std::size_t v = 0; v < cfg.videos; ++v) {
        FeatureFile file;
        file.dim = static_cast<std::uint32_t>(cfg.dim);
        for (std::size_t f = 0; f < cfg.frames_per_video; ++f) {
            const std::size_t scene = f * cfg.scenes / cfg.frames_per_video;
            std::vector<float> proto(prototypes[v][scene].begin(), prototypes[v][scene].end());
            FeatureRecord rec;
            rec.video_id = static_cast<std::uint32_t>(v);
            rec.frame_index = static_cast<std::uint32_t>(f);
            rec.timestamp = static_cast<float>(static_cast<double>(f) * cfg.frame_interval);
            rec.values = perturb(proto);
            file.records.push_back(std::move(rec));
        }
        out.videos.push_back(std::move(file));
    }

    std::uniform_int_distribution<std::size_t> video_dist(0, cfg.videos - 1);
    std::uniform_int_distribution<std::size_t> frame_dist(0, cfg.frames_per_video - 1);
    for (std::size_t q = 0; q < cfg.planted_queries; ++q) {
        const auto v = video_dist(rng);
        const auto f = frame_dist(rng);
        const auto& src = out.videos[v].records[f];
        FeatureFile file;
        file.dim = static_cast<std::uint32_t>(cfg.dim);
        file.records.push_back({0, 0, 0.0f, perturb(src.values)});
        out.queries.push_back({std::move(file), static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(f)});
    }
    return out;
}

}  // namespace vwii::synth

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace vwii;

namespace {

CorpusStats stats_of(std::uint64_t n_frames, std::vector<std::uint64_t> doc_freq) {
    CorpusStats s;
    s.n_frames = n_frames;
    s.doc_freq = std::move(doc_freq);
    return s;
}

Dictionary line_dictionary(std::size_t n) {
    Dictionary d;
    d.centroids.dim = 2;
    for (std::size_t i = 0; i < n; ++i) d.centroids.vectors.push_back({static_cast<double>(i), 0.0});
    return d;
}

}  // namespace

TEST(BuildDictionary, TwoDistinctFeaturesBecomeCentroids) {
    std::vector<FeatureVector> f{{1.0, 2.0}, {-3.0, 4.0}};
    auto d = build_dictionary(f, 2, 5);
    auto cs = d.centroids.vectors;
    std::sort(cs.begin(), cs.end());
    std::sort(f.begin(), f.end());
    EXPECT_EQ(cs, f);
    EXPECT_EQ(d.size(), 2u);
}

TEST(BuildDictionary, SingleWordQuantizesEverythingToZero) {
    std::vector<FeatureVector> f{{1.0}, {2.0}, {9.0}};
    auto d = build_dictionary(f, 1, 5);
    for (double x : {-100.0, 0.0, 3.5, 1e6}) EXPECT_EQ(quantize(FeatureVector{x}, d, 1).words(), std::vector<WordId>{0});
}

TEST(BuildDictionary, RejectsMoreWordsThanFrames) {
    std::vector<FeatureVector> f{{1.0}, {2.0}};
    EXPECT_THROW(build_dictionary(f, 3, 0), InvalidArgument);
}

TEST(Quantize, ExactCentroidHit) {
    const auto d = line_dictionary(8);
    EXPECT_EQ(quantize(FeatureVector{5.0, 0.0}, d, 1).words(), std::vector<WordId>{5});
}

TEST(Quantize, FullDictionaryReturnsAllWords) {
    const auto d = line_dictionary(6);
    const auto w = quantize(FeatureVector{2.2, 1.0}, d, 6);
    EXPECT_EQ(w.words(), (std::vector<WordId>{0, 1, 2, 3, 4, 5}));
    for (WordId i = 0; i < 6; ++i) EXPECT_EQ(w.multiplicity(i), 1u);
}

TEST(Quantize, TieGoesToLowerId) {
    const auto d = line_dictionary(4);
    EXPECT_EQ(quantize(FeatureVector{1.5, 0.0}, d, 1).words(), std::vector<WordId>{1});
}

TEST(Quantize, MatchesExhaustiveSortedScan) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Dictionary d;
    d.centroids.dim = 5;
    for (int i = 0; i < 64; ++i) {
        FeatureVector c(5);
        for (auto& x : c) x = g(rng);
        d.centroids.vectors.push_back(c);
    }
    for (int t = 0; t < 300; ++t) {
        FeatureVector v(5);
        for (auto& x : v) x = g(rng);
        for (std::size_t n : {1u, 3u, 5u, 17u})
            EXPECT_EQ(quantize(v, d, n).words(), oracle::nearest_n(v, d.centroids.vectors, n));
    }
}

TEST(Quantize, RejectsBadArguments) {
    const auto d = line_dictionary(4);
    EXPECT_THROW(quantize(FeatureVector{0.0, 0.0}, d, 0), InvalidArgument);
    EXPECT_THROW(quantize(FeatureVector{0.0, 0.0}, d, 5), InvalidArgument);
    EXPECT_THROW(quantize(FeatureVector{0.0}, d, 1), InvalidArgument);
}

TEST(CorpusStats, DirectCount) {
    std::vector<VisualWordSet> frames{{1, 2}, {2, 3}};
    const auto s = accumulate_stats(frames);
    EXPECT_EQ(s.n_frames, 2u);
    EXPECT_EQ(s.doc_freq_of(1), 1u);
    EXPECT_EQ(s.doc_freq_of(2), 2u);
    EXPECT_EQ(s.doc_freq_of(3), 1u);
    EXPECT_EQ(s.doc_freq_of(0), 0u);
    EXPECT_EQ(s.doc_freq_of(999), 0u);
}

TEST(CorpusStats, EmptyStream) {
    EXPECT_EQ(accumulate_stats(std::vector<VisualWordSet>{}).n_frames, 0u);
}

TEST(CorpusStats, MatchesRecountAndMergeOrder) {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<WordId> w(0, 49);
    std::vector<VisualWordSet> frames(100);
    for (auto& f : frames)
        for (int i = 0; i < 6; ++i) f.add(w(rng));
    const auto s = accumulate_stats(frames);
    for (WordId word = 0; word < 50; ++word) {
        std::uint64_t n = 0;
        for (const auto& f : frames) n += f.contains(word) ? 1 : 0;
        EXPECT_EQ(s.doc_freq_of(word), n);
        EXPECT_LE(s.doc_freq_of(word), s.n_frames);
    }
    auto a = accumulate_stats(std::span(frames).first(40));
    auto b = accumulate_stats(std::span(frames).subspan(40));
    auto ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    EXPECT_EQ(ab.n_frames, s.n_frames);
    EXPECT_EQ(ab.total_occurrences, ba.total_occurrences);
    for (WordId word = 0; word < 50; ++word) {
        EXPECT_EQ(ab.doc_freq_of(word), s.doc_freq_of(word));
        EXPECT_EQ(ba.doc_freq_of(word), s.doc_freq_of(word));
    }
}

TEST(WordWeight, WordInEveryFrameHasUnitIdf) {
    for (std::uint64_t n : {1u, 2u, 9u, 1000u}) EXPECT_EQ(word_weight(1, 0, stats_of(n, {n})), 1.0);
}

TEST(WordWeight, SingleFrameCorpus) { EXPECT_EQ(word_weight(2, 0, stats_of(1, {1})), 2.0); }

TEST(WordWeight, UnseenWord) {
    EXPECT_NEAR(word_weight(1, 0, stats_of(9, {0})), std::log(10.0) + 1.0, 1e-12);
    EXPECT_NEAR(word_weight(1, 7, stats_of(9, {0})), 3.302585093, 1e-9);
}

TEST(WordWeight, StrictlyDecreasingInDocFreq) {
    for (std::uint64_t n : {1u, 5u, 50u, 1000u})
        for (std::uint64_t tf : {1u, 3u})
            for (std::uint64_t nw = 0; nw < n; ++nw)
                EXPECT_GT(word_weight(tf, 0, stats_of(n, {nw})), word_weight(tf, 0, stats_of(n, {nw + 1})));
}

TEST(WordWeight, LinearInTf) {
    for (std::uint64_t nw : {0u, 3u, 10u})
        for (std::uint64_t t = 1; t < 20; ++t) {
            const auto s = stats_of(10, {nw});
            EXPECT_NEAR(word_weight(2 * t, 0, s), 2.0 * word_weight(t, 0, s), 1e-12);
            EXPECT_NEAR(word_weight(t, 0, s), oracle::tfidf(t, 10, nw), 1e-12);
        }
}

TEST(WordWeight, RejectsZeroTfAndEmptyStats) {
    EXPECT_THROW(word_weight(0, 0, stats_of(1, {1})), InvalidArgument);
    EXPECT_THROW(word_weight(1, 0, CorpusStats{}), InvalidArgument);
}

TEST(WeighDoc, ModeContrast) {
    VisualWordSet s;
    s.add(4, 2);
    const auto stats = stats_of(3, {0, 0, 0, 0, 3});
    const auto per_doc = weigh_doc(s, stats, WeightingMode::per_document);
    EXPECT_EQ(per_doc.weight_of(4), 2.0);
    EXPECT_EQ(per_doc.total_weight(), 2.0);
    const auto global = weigh_doc(s, stats, WeightingMode::global);
    EXPECT_EQ(global.weight_of(4), 1.0);
}

TEST(WeighDoc, TotalEqualsIndependentSum) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<WordId> w(0, 30);
    std::vector<VisualWordSet> frames(40);
    for (auto& f : frames)
        for (int i = 0; i < 5; ++i) f.add(w(rng), 1 + (i % 3));
    const auto stats = accumulate_stats(frames);
    for (const auto& f : frames) {
        const auto d = weigh_doc(f, stats, WeightingMode::per_document);
        double sum = 0.0;
        for (const auto& e : d.entries()) {
            sum += e.weight;
            EXPECT_GT(e.weight, 0.0);
            EXPECT_NEAR(e.weight, oracle::tfidf(f.multiplicity(e.word), stats.n_frames, stats.doc_freq_of(e.word)),
                        1e-12);
        }
        EXPECT_NEAR(d.total_weight(), sum, 1e-9 * sum);
        EXPECT_EQ(d.size(), f.size());
    }
}

TEST(WeightedWordDoc, RejectsInvalidEntries) {
    EXPECT_THROW((WeightedWordDoc{{1, 0.0}}), InvalidArgument);
    EXPECT_THROW((WeightedWordDoc{{1, -1.0}}), InvalidArgument);
    EXPECT_THROW((WeightedWordDoc{{1, 1.0}, {1, 2.0}}), InvalidArgument);
    EXPECT_THROW((WeightedWordDoc{{1, std::numeric_limits<double>::infinity()}}), InvalidArgument);
}

TEST(WeightedWordDoc, SortsByWord) {
    const WeightedWordDoc d{{9, 1.0}, {2, 3.0}, {5, 2.0}};
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.entries()[0].word, 2u);
    EXPECT_EQ(d.entries()[2].word, 9u);
    EXPECT_EQ(d.total_weight(), 6.0);
    EXPECT_FALSE(d.contains(3));
}

TEST(WeightingMode, ParsesNames) {
    EXPECT_EQ(parse_weighting_mode("global"), WeightingMode::global);
    EXPECT_EQ(parse_weighting_mode(to_string(WeightingMode::per_document)), WeightingMode::per_document);
    EXPECT_FALSE(parse_weighting_mode("tfidf").has_value());
}

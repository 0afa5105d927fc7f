#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oracles.hpp"

using namespace vwii;

namespace {

std::vector<ScoredDoc> oracle_top(const VwiiIndex& idx, const WeightedWordDoc& q, std::size_t k) {
    std::vector<ScoredDoc> out;
    for (const auto& [d, s] : oracle::rank_all(idx, q)) {
        if (out.size() == k) break;
        out.push_back({d, s});
    }
    return out;
}

void expect_same_ranking(const std::vector<ScoredDoc>& got, const std::vector<ScoredDoc>& want, double tol) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].doc_id, want[i].doc_id) << "rank " << i;
        EXPECT_NEAR(got[i].score, want[i].score, tol) << "rank " << i;
    }
}

/// Checks every candidate's bound and the unseen-document threshold against
/// exact scores after each sorted access.
struct AdmissibilityProbe {
    const VwiiIndex* idx;
    const WeightedWordDoc* q;
    std::vector<double> exact;
    std::size_t steps = 0;
    std::size_t violations = 0;
    std::size_t matched_decreases = 0;
    std::map<DocId, double> last_matched;

    void operator()(const SearchSnapshot& s) {
        ++steps;
        std::vector<bool> seen(idx->doc_count(), false);
        for (const auto& c : s.candidates()) {
            seen[c.doc_id] = true;
            if (upper_bound(c, s.lists(), s.query_total()) < exact[c.doc_id] - kBoundSlack) ++violations;
            auto& prev = last_matched[c.doc_id];
            if (c.matched_weight < prev) ++matched_decreases;
            prev = c.matched_weight;
        }
        const double tau = s.threshold();
        for (DocId d = 0; d < idx->doc_count(); ++d)
            if (!seen[d] && tau < exact[d] - kBoundSlack) ++violations;
    }
};

}  // namespace

TEST(VisSim, IdentityDisjointAndHandCase) {
    const WeightedWordDoc a{{1, 2.0}, {2, 1.0}};
    EXPECT_EQ(vis_sim(a, a), 1.0);
    EXPECT_EQ(vis_sim(a, WeightedWordDoc{{3, 1.0}}), 0.0);
    const WeightedWordDoc d{{1, 1.0}, {3, 1.0}};
    EXPECT_NEAR(vis_sim(a, d), 0.25, 1e-12);
    EXPECT_EQ(vis_sim(WeightedWordDoc{}, WeightedWordDoc{}), 0.0);
}

TEST(VisSim, SymmetricBoundedAndMatchesMapOracle) {
    const auto idx = oracle::random_index(120, 30, 10, 1);
    const auto docs = idx.docs();
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::size_t j = i; j < docs.size(); j += 7) {
            const double s = vis_sim(docs[i].doc, docs[j].doc);
            EXPECT_EQ(s, vis_sim(docs[j].doc, docs[i].doc));
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
            EXPECT_NEAR(s, oracle::weighted_jaccard(oracle::as_map(docs[i].doc), oracle::as_map(docs[j].doc)), 1e-12);
        }
}

TEST(VisSim, GlobalModeIsSetJaccardOfIdfWeights) {
    // With one weight per word the measure is the idf-weighted Jaccard of the two sets.
    const WeightedWordDoc q{{0, 1.5}, {1, 2.0}, {2, 1.0}};
    const WeightedWordDoc d{{1, 2.0}, {2, 1.0}, {5, 3.0}};
    EXPECT_NEAR(vis_sim(q, d), 3.0 / 7.5, 1e-12);
}

TEST(SimVideo, MaxOverClusters) {
    const WeightedWordDoc q{{1, 1.0}, {2, 1.0}};
    const std::vector<WeightedWordDoc> one{{{1, 1.0}}};
    EXPECT_EQ(sim_video(q, one), vis_sim(q, one[0]));
    const std::vector<WeightedWordDoc> with_copy{{{7, 1.0}}, q};
    EXPECT_EQ(sim_video(q, with_copy), 1.0);

    const auto idx = oracle::random_index(5, 10, 5, 2);
    std::vector<WeightedWordDoc> five;
    double best = 0.0;
    for (const auto& d : idx.docs()) {
        five.push_back(d.doc);
        best = std::max(best, vis_sim(q, d.doc));
    }
    EXPECT_EQ(sim_video(q, five), best);
    EXPECT_THROW(sim_video(q, std::vector<WeightedWordDoc>{}), InvalidArgument);
}

TEST(UpperBound, LimitCases) {
    const std::vector<ListFrontier> lists{{1, 2.0, 3.0}, {2, 1.0, 1.0}};
    CandidateState none;
    EXPECT_EQ(upper_bound(none, lists, 3.0), 1.0);
    EXPECT_EQ(threshold(lists, 3.0), 1.0);

    CandidateState all;
    all.matched_weight = 1.5;
    all.seen_lists = {0, 1};
    EXPECT_EQ(upper_bound(all, lists, 3.0), 0.5);

    CandidateState first;
    first.matched_weight = 0.5;
    first.seen_lists = {0};
    EXPECT_EQ(upper_bound(first, lists, 3.0), 0.5);
}

TEST(UpperBound, MonotoneInMatchedWeightAndFrontiers) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<ListFrontier> lists;
        for (WordId w = 0; w < 6; ++w) lists.push_back({w, 0.1 + u(rng), u(rng)});
        CandidateState c;
        c.matched_weight = u(rng);
        for (std::size_t l = 0; l < 6; ++l)
            if (rng() % 2) c.seen_lists.push_back(l);
        const double qt = 20.0;
        const double b = upper_bound(c, lists, qt);
        auto more = c;
        more.matched_weight += u(rng);
        EXPECT_GE(upper_bound(more, lists, qt), b);
        auto raised = lists;
        raised[rng() % 6].frontier += u(rng);
        EXPECT_GE(upper_bound(c, raised, qt), b);
    }
}

TEST(VwiiSearch, ExactAgainstBruteForceAndMapOracle) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto mode = seed % 2 ? WeightingMode::global : WeightingMode::per_document;
        const auto idx = oracle::random_index(300 + 100 * seed, 40 + 10 * seed, 10, seed, 3, mode);
        std::mt19937_64 rng(seed + 100);
        for (int qi = 0; qi < 15; ++qi) {
            const auto qdoc = oracle::random_query(idx, 2 + qi % 12, rng);
            for (std::size_t k : {1u, 5u, 10u, 50u})
                for (std::size_t xi : {1u, 4u, 16u}) {
                    QuerySpec q{qdoc, k, xi, std::nullopt};
                    const auto fast = vwii_search(idx, q);
                    auto brute = brute_force_search(idx, q).docs;
                    if (brute.size() > k) brute.resize(k);
                    expect_same_ranking(fast.docs, brute, 1e-9);
                    expect_same_ranking(fast.docs, oracle_top(idx, qdoc, k), 1e-12);
                    EXPECT_LE(fast.stats.full_scores_computed, idx.doc_count());
                    EXPECT_EQ(fast.stats.full_scores_computed, fast.stats.random_accesses);
                }
        }
    }
}

TEST(VwiiSearch, ExactUnderHeavyTies) {
    // Few words and equal weights produce many identical scores.
    const auto idx = oracle::random_index(400, 6, 3, 77, 4, WeightingMode::global);
    std::mt19937_64 rng(5);
    for (int qi = 0; qi < 30; ++qi) {
        const auto qdoc = oracle::random_query(idx, 1 + qi % 4, rng);
        for (std::size_t k : {1u, 3u, 17u})
            for (std::size_t xi : {1u, 2u, 16u}) {
                QuerySpec q{qdoc, k, xi, std::nullopt};
                expect_same_ranking(vwii_search(idx, q).docs, oracle_top(idx, qdoc, k), 1e-12);
            }
    }
}

TEST(VwiiSearch, BoundsAdmissibleAtEveryAccess) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto idx = oracle::random_index(150 + 100 * seed, 25, 8, seed + 40);
        std::mt19937_64 rng(seed);
        for (int qi = 0; qi < 10; ++qi) {
            const auto qdoc = oracle::random_query(idx, 3 + qi, rng);
            AdmissibilityProbe probe{&idx, &qdoc, {}};
            for (const auto& d : idx.docs()) probe.exact.push_back(vis_sim(qdoc, d.doc));
            for (std::size_t xi : {1u, 3u}) {
                vwii_search(idx, QuerySpec{qdoc, 5, xi, std::nullopt}, probe);
            }
            EXPECT_GT(probe.steps, 0u);
            EXPECT_EQ(probe.violations, 0u);
        }
    }
}

TEST(VwiiSearch, MatchedWeightNeverDecreases) {
    const auto idx = oracle::random_index(200, 20, 8, 4);
    std::mt19937_64 rng(2);
    const auto qdoc = oracle::random_query(idx, 8, rng);
    AdmissibilityProbe probe{&idx, &qdoc, {}};
    for (const auto& d : idx.docs()) probe.exact.push_back(vis_sim(qdoc, d.doc));
    vwii_search(idx, QuerySpec{qdoc, 3, 2, std::nullopt}, probe);
    EXPECT_EQ(probe.matched_decreases, 0u);
}

TEST(VwiiSearch, EmptyQueryAndUnknownWords) {
    const auto idx = oracle::random_index(50, 10, 4, 1);
    EXPECT_TRUE(vwii_search(idx, QuerySpec{WeightedWordDoc{}, 5, 8, std::nullopt}).docs.empty());
    EXPECT_TRUE(topk_videos(idx, QuerySpec{WeightedWordDoc{}, 5, 8, std::nullopt}).videos.empty());
    // Word 500 has no posting list.
    EXPECT_TRUE(vwii_search(idx, QuerySpec{WeightedWordDoc{{500, 1.0}}, 5, 8, std::nullopt}).docs.empty());
}

TEST(VwiiSearch, RejectsInvalidSpecs) {
    const auto idx = oracle::random_index(10, 10, 4, 1);
    const WeightedWordDoc q{{1, 1.0}};
    EXPECT_THROW(vwii_search(idx, QuerySpec{q, 0, 8, std::nullopt}), InvalidArgument);
    EXPECT_THROW(vwii_search(idx, QuerySpec{q, 1, 0, std::nullopt}), InvalidArgument);
    EXPECT_THROW(topk_videos(idx, QuerySpec{q, 1, 1, 1.5}), InvalidArgument);
    EXPECT_THROW(topk_videos(idx, QuerySpec{q, 1, 1, -0.1}), InvalidArgument);
}

TEST(VwiiSearch, PrunesOnTopicCorpus) {
    synth::ZipfCorpusConfig cfg;
    cfg.n_docs = 3000;
    cfg.n_topics = 150;
    const auto corpus = synth::make_zipf_corpus(cfg);
    std::mt19937_64 rng(7);
    std::uint64_t scored = 0;
    for (int i = 0; i < 20; ++i) {
        QuerySpec q{synth::make_zipf_query(corpus, 20, rng), 10, 8, std::nullopt};
        scored += vwii_search(corpus.index, q).stats.full_scores_computed;
    }
    EXPECT_LT(scored / 20, corpus.index.doc_count() / 2);
}

TEST(TopkVideos, MatchesBruteForceAndGroupingOracle) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto idx = oracle::random_index(400, 30, 8, seed + 9, 1 + seed * 3);
        std::mt19937_64 rng(seed);
        for (int qi = 0; qi < 20; ++qi) {
            const auto qdoc = oracle::random_query(idx, 2 + qi % 8, rng);
            for (std::size_t k : {1u, 4u, 10u, 30u}) {
                QuerySpec q{qdoc, k, 4, std::nullopt};
                const auto fast = topk_videos(idx, q);
                const auto slow = brute_force_videos(idx, q);
                ASSERT_EQ(fast.videos.size(), slow.videos.size());
                for (std::size_t i = 0; i < fast.videos.size(); ++i) {
                    EXPECT_EQ(fast.videos[i].video_id, slow.videos[i].video_id);
                    EXPECT_NEAR(fast.videos[i].score, slow.videos[i].score, 1e-9);
                    EXPECT_EQ(fast.videos[i].best_doc, slow.videos[i].best_doc);
                }

                // Independent grouping: best score per video, then rank.
                std::map<std::uint32_t, double> best;
                for (const auto& [d, s] : oracle::rank_all(idx, qdoc)) {
                    auto& b = best[idx.docs()[d].video_id];
                    b = std::max(b, s);
                }
                std::vector<std::pair<std::uint32_t, double>> ranked(best.begin(), best.end());
                std::stable_sort(ranked.begin(), ranked.end(),
                                 [](const auto& a, const auto& b) { return a.second > b.second; });
                if (ranked.size() > k) ranked.resize(k);
                ASSERT_EQ(fast.videos.size(), ranked.size());
                for (std::size_t i = 0; i < ranked.size(); ++i) {
                    EXPECT_EQ(fast.videos[i].video_id, ranked[i].first);
                    EXPECT_NEAR(fast.videos[i].score, ranked[i].second, 1e-12);
                }
            }
        }
    }
}

TEST(TopkVideos, ResultOrderAndLength) {
    const auto idx = oracle::random_index(300, 20, 8, 3, 6);
    std::mt19937_64 rng(1);
    for (int qi = 0; qi < 20; ++qi) {
        const auto r = topk_videos(idx, QuerySpec{oracle::random_query(idx, 5, rng), 7, 8, std::nullopt});
        EXPECT_LE(r.videos.size(), 7u);
        for (std::size_t i = 1; i < r.videos.size(); ++i) {
            const auto& a = r.videos[i - 1];
            const auto& b = r.videos[i];
            EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.video_id < b.video_id));
        }
    }
}

TEST(TopkVideos, EpsilonSemantics) {
    const auto idx = oracle::random_index(300, 20, 8, 8, 5);
    std::mt19937_64 rng(6);
    for (int qi = 0; qi < 20; ++qi) {
        const auto qdoc = oracle::random_query(idx, 4, rng);
        for (double eps : {0.0, 0.05, 0.2, 0.5, 0.99, 1.0}) {
            QuerySpec q{qdoc, 10, 4, eps};
            const auto fast = topk_videos(idx, q);
            for (const auto& v : fast.videos) EXPECT_GE(v.score, eps);
            QuerySpec unfiltered = q;
            unfiltered.epsilon.reset();
            std::size_t expected = 0;
            for (const auto& v : brute_force_videos(idx, unfiltered).videos)
                if (v.score >= eps) ++expected;
            EXPECT_EQ(fast.videos.size(), expected);
            EXPECT_EQ(fast.videos, brute_force_videos(idx, q).videos);
        }
    }
}

TEST(TopkVideos, EpsilonZeroKeepsEverythingAndNearOneDropsUnrelated) {
    const auto idx = oracle::random_index(100, 20, 6, 2, 5);
    const WeightedWordDoc q{{0, 1.0}, {1, 1.0}, {2, 1.0}};
    QuerySpec all{q, 100, 4, 0.0};
    QuerySpec none{q, 100, 4, std::nullopt};
    EXPECT_EQ(topk_videos(idx, all).videos, topk_videos(idx, none).videos);
    EXPECT_TRUE(topk_videos(idx, QuerySpec{WeightedWordDoc{{19, 0.01}}, 10, 4, 0.99}).videos.empty());
}

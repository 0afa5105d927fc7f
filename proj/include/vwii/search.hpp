#pragma once

// Query evaluation over a VwiiIndex: the weighted-overlap similarity, the
// threshold-algorithm search over the query words' posting lists, the
// brute-force oracle, and video-level top-k aggregation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vwii/bovw.hpp"
#include "vwii/error.hpp"
#include "vwii/vwii_index.hpp"

namespace vwii {

/// Absolute slack applied to every bound-versus-score comparison. Bounds and
/// exact scores are summed in different orders, so a bound that equals a
/// score mathematically can come out a few ulps lower in floating point.
inline constexpr double kBoundSlack = 1e-10;

/// Sum of min(Wq, Wd) over shared words divided by the sum of max(Wq, Wd)
/// over all words of either document. Zero when both are empty.
inline double vis_sim(const WeightedWordDoc& q, const WeightedWordDoc& d) {
    auto a = q.entries();
    auto b = d.entries();
    double num = 0.0, den = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].word == b[j].word) {
            num += std::min(a[i].weight, b[j].weight);
            den += std::max(a[i].weight, b[j].weight);
            ++i;
            ++j;
        } else if (a[i].word < b[j].word) {
            den += a[i++].weight;
        } else {
            den += b[j++].weight;
        }
    }
    for (; i < a.size(); ++i) den += a[i].weight;
    for (; j < b.size(); ++j) den += b[j].weight;
    return den > 0.0 ? num / den : 0.0;
}

/// Best similarity between the query and any cluster of one video.
inline double sim_video(const WeightedWordDoc& q, std::span<const WeightedWordDoc> clusters) {
    if (clusters.empty()) throw InvalidArgument("sim_video: video has no clusters");
    double best = 0.0;
    for (const auto& c : clusters) best = std::max(best, vis_sim(q, c));
    return best;
}

inline std::size_t shared_word_count(const WeightedWordDoc& q, const WeightedWordDoc& d) {
    auto a = q.entries();
    auto b = d.entries();
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].word == b[j].word) {
            ++n;
            ++i;
            ++j;
        } else if (a[i].word < b[j].word) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

struct QuerySpec {
    WeightedWordDoc doc;
    std::size_t k = 10;
    /// Consecutive sorted accesses per list per round.
    std::size_t xi = 8;
    /// Minimum video score to report, in [0, 1].
    std::optional<double> epsilon;

    void validate() const {
        if (k < 1) throw InvalidArgument("query: k must be at least 1");
        if (xi < 1) throw InvalidArgument("query: xi must be at least 1");
        if (epsilon && !(*epsilon >= 0.0 && *epsilon <= 1.0))
            throw InvalidArgument("query: epsilon must lie in [0, 1]");
    }
};

struct SearchStats {
    std::uint64_t sorted_accesses = 0;
    std::uint64_t random_accesses = 0;
    std::uint64_t candidates_seen = 0;
    std::uint64_t full_scores_computed = 0;

    SearchStats& operator+=(const SearchStats& o) {
        sorted_accesses += o.sorted_accesses;
        random_accesses += o.random_accesses;
        candidates_seen += o.candidates_seen;
        full_scores_computed += o.full_scores_computed;
        return *this;
    }
};

struct ScoredDoc {
    DocId doc_id;
    double score;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Ranking order: score descending, then doc id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

struct DocRanking {
    std::vector<ScoredDoc> docs;
    SearchStats stats;
};

/// One consulted posting list: the query word's weight and the weight at the
/// list's current read position (0 once exhausted).
struct ListFrontier {
    WordId word;
    double query_weight;
    double frontier;
};

struct CandidateState {
    DocId doc_id = 0;
    double matched_weight = 0.0;
    /// Indices into the consulted lists, ascending.
    std::vector<std::size_t> seen_lists;
    std::optional<double> exact_score;
};

/// (matched + sum over unseen lists of min(Wq, frontier)) / total query weight.
inline double upper_bound(const CandidateState& c, std::span<const ListFrontier> lists,
                          double query_total) {
    if (!(query_total > 0.0)) return 0.0;
    double num = c.matched_weight;
    std::size_t s = 0;
    for (std::size_t l = 0; l < lists.size(); ++l) {
        while (s < c.seen_lists.size() && c.seen_lists[s] < l) ++s;
        if (s < c.seen_lists.size() && c.seen_lists[s] == l) continue;
        num += std::min(lists[l].query_weight, lists[l].frontier);
    }
    return num / query_total;
}

/// Bound on the score of any document not yet met in any list.
inline double threshold(std::span<const ListFrontier> lists, double query_total) {
    if (!(query_total > 0.0)) return 0.0;
    double num = 0.0;
    for (const auto& l : lists) num += std::min(l.query_weight, l.frontier);
    return num / query_total;
}

struct NoObserver {
    template <class Snapshot>
    void operator()(const Snapshot&) const noexcept {}
};

namespace detail {

/// Fixed-capacity best-k set in ranking order.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(ScoredDoc s) {
        if (items_.size() == k_) {
            if (!ranks_before(s, items_.back())) return;
            items_.pop_back();
        }
        items_.insert(std::upper_bound(items_.begin(), items_.end(), s, ranks_before), s);
    }

    /// k-th best score so far, 0 while fewer than k documents are scored.
    double s_min() const noexcept { return items_.size() < k_ ? 0.0 : items_.back().score; }

    std::vector<ScoredDoc> take() && { return std::move(items_); }
    std::span<const ScoredDoc> items() const noexcept { return items_; }

private:
    std::size_t k_;
    std::vector<ScoredDoc> items_;
};

/// Exact scores kept across repeated searches of the same query; NaN = unknown.
using ScoreCache = std::vector<double>;

class ThresholdSearch;

}  // namespace detail

/// Read-only view of a running search, handed to observers after every
/// sorted access.
class SearchSnapshot {
public:
    explicit SearchSnapshot(const detail::ThresholdSearch& s) : s_(s) {}

    std::span<const ListFrontier> lists() const noexcept;
    double query_total() const noexcept;
    double threshold() const noexcept { return vwii::threshold(lists(), query_total()); }
    double s_min() const noexcept;
    const SearchStats& stats() const noexcept;
    std::vector<CandidateState> candidates() const;

private:
    const detail::ThresholdSearch& s_;
};

namespace detail {

class ThresholdSearch {
public:
    ThresholdSearch(const VwiiIndex& index, const QuerySpec& q, ScoreCache* cache = nullptr)
        : index_(index), q_(q), top_(q.k), cache_(cache) {
        query_total_ = q.doc.total_weight();
        for (const auto& e : q.doc.entries()) {
            auto list = index.postings(e.word);
            if (list.empty()) continue;
            lists_.push_back({list, 0});
            frontiers_.push_back({e.word, e.weight, list.front().weight});
        }
        slot_of_.assign(index.doc_count(), kNoSlot);
        refresh_frontier_total();
    }

    template <class Observer>
    DocRanking run(Observer& observe) {
        if (lists_.empty()) return {};

        for (;;) {
            for (std::size_t l = 0; l < lists_.size(); ++l) {
                for (std::size_t j = 0; j < q_.xi && lists_[l].pos < lists_[l].postings.size(); ++j) {
                    sorted_access(l);
                    if constexpr (!std::is_same_v<std::remove_cvref_t<Observer>, NoObserver>)
                        observe(SearchSnapshot(*this));
                }
            }
            refresh_frontier_total();
            random_access_best();

            const bool exhausted = std::all_of(lists_.begin(), lists_.end(), [](const List& l) {
                return l.pos >= l.postings.size();
            });
            if (exhausted) break;
            // Stop once neither an unseen document nor an unscored candidate
            // can still reach the k-th score.
            if (frontier_total_ / query_total_ + kBoundSlack < top_.s_min() && !best_available()) break;
        }
        final_sweep();
        return {std::move(top_).take(), stats_};
    }

private:
    friend class vwii::SearchSnapshot;

    static constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();
    static constexpr std::int32_t kNoHit = -1;

    struct List {
        std::span<const Posting> postings;
        std::size_t pos;
    };

    struct Candidate {
        DocId doc;
        double matched = 0.0;
        std::int32_t first_hit = kNoHit;
        bool scored = false;
        double exact = 0.0;
    };

    // Intrusive singly linked list of the lists a candidate was met in.
    struct Hit {
        std::uint32_t list;
        std::int32_t next;
    };

    struct HeapEntry {
        double key;
        std::uint32_t slot;
        DocId doc;
    };

    struct HeapOrder {
        bool operator()(const HeapEntry& a, const HeapEntry& b) const {
            if (a.key != b.key) return a.key < b.key;
            return a.doc > b.doc;
        }
    };

    double capped_frontier(std::size_t l) const {
        return std::min(frontiers_[l].query_weight, frontiers_[l].frontier);
    }

    void sorted_access(std::size_t l) {
        List& list = lists_[l];
        const Posting p = list.postings[list.pos++];
        ++stats_.sorted_accesses;
        frontiers_[l].frontier = list.pos < list.postings.size() ? list.postings[list.pos].weight : 0.0;

        std::uint32_t slot = slot_of_[p.doc_id];
        if (slot == kNoSlot) {
            slot = static_cast<std::uint32_t>(cands_.size());
            slot_of_[p.doc_id] = slot;
            cands_.push_back({p.doc_id});
            ++stats_.candidates_seen;
            // frontier_total_ dates from the start of the round, so this key is
            // at least the candidate's bound now and at any later point.
            const double key = (std::min(frontiers_[l].query_weight, p.weight) +
                                std::max(0.0, frontier_total_ - capped_frontier(l))) /
                               query_total_;
            // Bounds never grow: a candidate below the k-th score now stays out
            // of the sorted phase. The final sweep still re-checks it.
            if (available(key)) heap_.push({key, slot, p.doc_id});
        }
        Candidate& c = cands_[slot];
        c.matched += std::min(frontiers_[l].query_weight, p.weight);
        hits_.push_back({static_cast<std::uint32_t>(l), c.first_hit});
        c.first_hit = static_cast<std::int32_t>(hits_.size() - 1);
    }

    void refresh_frontier_total() {
        frontier_total_ = 0.0;
        for (std::size_t l = 0; l < lists_.size(); ++l) frontier_total_ += capped_frontier(l);
    }

    double bound(const Candidate& c) const {
        double seen = 0.0;
        for (std::int32_t h = c.first_hit; h != kNoHit; h = hits_[h].next) seen += capped_frontier(hits_[h].list);
        return (c.matched + std::max(0.0, frontier_total_ - seen)) / query_total_;
    }

    void score(Candidate& c) {
        double s;
        if (cache_ && !std::isnan((*cache_)[c.doc])) {
            s = (*cache_)[c.doc];
        } else {
            const DocRecord& rec = index_.random_access(c.doc);
            ++stats_.random_accesses;
            ++stats_.full_scores_computed;
            s = vis_sim(q_.doc, rec.doc);
            if (cache_) (*cache_)[c.doc] = s;
        }
        c.exact = s;
        c.scored = true;
        top_.offer({c.doc, s});
    }

    bool available(double b) const { return b + kBoundSlack >= top_.s_min(); }

    /// Slot of the unscored candidate with the highest current bound, if that
    /// bound can still reach the k-th score. Leaves it on top of the heap.
    std::optional<std::uint32_t> best_available() {
        while (!heap_.empty()) {
            const HeapEntry top = heap_.top();
            Candidate& c = cands_[top.slot];
            if (c.scored) {
                heap_.pop();
                continue;
            }
            const double b = bound(c);
            if (!available(b)) {
                // Out for the rest of the sorted phase; the final sweep re-checks it.
                heap_.pop();
                continue;
            }
            if (b < top.key) {
                heap_.pop();
                heap_.push({b, top.slot, top.doc});
                continue;
            }
            return top.slot;
        }
        return std::nullopt;
    }

    /// Random access on the best available candidate, if any.
    void random_access_best() {
        if (auto slot = best_available()) {
            heap_.pop();
            score(cands_[*slot]);
        }
    }

    void final_sweep() {
        refresh_frontier_total();
        std::vector<ScoredDoc> rest;
        for (const auto& c : cands_) {
            if (c.scored) continue;
            const double b = bound(c);
            if (available(b)) rest.push_back({c.doc, b});
        }
        std::sort(rest.begin(), rest.end(), ranks_before);
        for (const auto& r : rest)
            if (available(r.score)) score(cands_[slot_of_[r.doc_id]]);
    }

    const VwiiIndex& index_;
    const QuerySpec& q_;
    double query_total_ = 0.0;
    double frontier_total_ = 0.0;
    std::vector<List> lists_;
    std::vector<ListFrontier> frontiers_;
    std::vector<std::uint32_t> slot_of_;
    std::vector<Candidate> cands_;
    std::vector<Hit> hits_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap_;
    TopK top_;
    SearchStats stats_;
    ScoreCache* cache_;
};

}  // namespace detail

inline std::span<const ListFrontier> SearchSnapshot::lists() const noexcept { return s_.frontiers_; }
inline double SearchSnapshot::query_total() const noexcept { return s_.query_total_; }
inline double SearchSnapshot::s_min() const noexcept { return s_.top_.s_min(); }
inline const SearchStats& SearchSnapshot::stats() const noexcept { return s_.stats_; }

inline std::vector<CandidateState> SearchSnapshot::candidates() const {
    std::vector<CandidateState> out;
    out.reserve(s_.cands_.size());
    for (const auto& c : s_.cands_) {
        CandidateState st;
        st.doc_id = c.doc;
        st.matched_weight = c.matched;
        for (auto h = c.first_hit; h != detail::ThresholdSearch::kNoHit; h = s_.hits_[h].next)
            st.seen_lists.push_back(s_.hits_[h].list);
        std::sort(st.seen_lists.begin(), st.seen_lists.end());
        if (c.scored) st.exact_score = c.exact;
        out.push_back(std::move(st));
    }
    return out;
}

/// Threshold-algorithm top-k over the posting lists of the query's words.
///
/// Rounds read `xi` postings from every list, accumulating each document's
/// matched weight. After each round the unscored candidate with the highest
/// upper bound is scored exactly by random access if its bound can still
/// reach the current k-th score. The sorted phase ends once neither an unseen
/// document nor an unscored candidate can still reach the k-th score, or
/// every list is exhausted; remaining candidates whose bound can still reach
/// the top k are then scored. The result equals the top k of `brute_force_search`, ties broken
/// by ascending doc id. Only documents sharing a word with the query are
/// returned.
template <class Observer = NoObserver>
DocRanking vwii_search(const VwiiIndex& index, const QuerySpec& q, Observer&& observe = {}) {
    q.validate();
    if (q.doc.empty()) return {};
    detail::ThresholdSearch search(index, q);
    return search.run(observe);
}

/// Exact similarity against every document; all documents with a positive
/// score, in ranking order.
inline DocRanking brute_force_search(const VwiiIndex& index, const QuerySpec& q) {
    DocRanking out;
    const auto docs = index.docs();
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const double s = vis_sim(q.doc, docs[d].doc);
        if (s > 0.0) out.docs.push_back({static_cast<DocId>(d), s});
    }
    out.stats.random_accesses = docs.size();
    out.stats.full_scores_computed = docs.size();
    std::sort(out.docs.begin(), out.docs.end(), ranks_before);
    return out;
}

struct VideoHit {
    std::uint32_t video_id;
    double score;
    std::uint32_t best_cluster_id;
    DocId best_doc;
    std::size_t matched_words;

    friend bool operator==(const VideoHit&, const VideoHit&) = default;
};

struct QueryResult {
    /// Score descending, then video id ascending.
    std::vector<VideoHit> videos;
    SearchStats stats;
};

/// Collapses a doc ranking to one entry per video (its best cluster), in
/// video ranking order.
inline std::vector<VideoHit> group_by_video(const VwiiIndex& index, const WeightedWordDoc& q,
                                            std::span<const ScoredDoc> ranked) {
    std::vector<VideoHit> out;
    std::unordered_set<std::uint32_t> seen;
    for (const auto& r : ranked) {
        const auto& rec = index.random_access(r.doc_id);
        if (!seen.insert(rec.video_id).second) continue;
        out.push_back({rec.video_id, r.score, rec.cluster_id, r.doc_id, shared_word_count(q, rec.doc)});
    }
    std::stable_sort(out.begin(), out.end(), [](const VideoHit& a, const VideoHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.video_id < b.video_id;
    });
    return out;
}

namespace detail {

inline void finish_videos(std::vector<VideoHit>& videos, const QuerySpec& q) {
    if (videos.size() > q.k) videos.resize(q.k);
    if (q.epsilon) {
        const double eps = *q.epsilon;
        std::erase_if(videos, [eps](const VideoHit& v) { return v.score < eps; });
    }
}

}  // namespace detail

/// Top-k videos, a video scoring as its best cluster. Runs `vwii_search`
/// with a doc-level depth that doubles (from k) until no document below the
/// searched depth could change the video top k. With epsilon set, videos
/// scoring below it are dropped, so fewer than k may be returned.
inline QueryResult topk_videos(const VwiiIndex& index, const QuerySpec& q) {
    q.validate();
    QueryResult result;
    if (q.doc.empty() || index.doc_count() == 0) return result;

    detail::ScoreCache cache(index.doc_count(), std::numeric_limits<double>::quiet_NaN());
    QuerySpec inner = q;
    inner.epsilon.reset();
    inner.k = std::min(q.k, index.doc_count());

    for (;;) {
        detail::ThresholdSearch search(index, inner, &cache);
        NoObserver none;
        DocRanking docs = search.run(none);
        // Sorted accesses and candidates accumulate over depths; exact scores
        // are cached, so each document is fetched at most once.
        result.stats += docs.stats;

        auto videos = group_by_video(index, q.doc, docs.docs);
        const bool complete = docs.docs.size() < inner.k || inner.k >= index.doc_count();
        bool settled = complete;
        if (!settled && !docs.docs.empty()) {
            // Documents beyond this depth score at most `floor`.
            const double floor = docs.docs.back().score;
            if (videos.size() >= q.k && floor < videos[q.k - 1].score) settled = true;
            if (q.epsilon && floor < *q.epsilon) settled = true;
        }
        if (settled) {
            detail::finish_videos(videos, q);
            result.videos = std::move(videos);
            break;
        }
        inner.k = std::min(inner.k * 2, index.doc_count());
    }
    return result;
}

/// Oracle for `topk_videos`: brute force grouped by video.
inline QueryResult brute_force_videos(const VwiiIndex& index, const QuerySpec& q) {
    q.validate();
    QueryResult result;
    if (q.doc.empty()) return result;
    DocRanking docs = brute_force_search(index, q);
    result.stats = docs.stats;
    result.videos = group_by_video(index, q.doc, docs.docs);
    detail::finish_videos(result.videos, q);
    return result;
}

}  // namespace vwii

#pragma once

// Bag-of-visual-words layer: dictionary training, quantization of frame
// features into visual-word sets, corpus statistics and TF-IDF weighting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vwii/error.hpp"
#include "vwii/feature_model.hpp"

namespace vwii {

using WordId = std::uint32_t;

struct Dictionary {
    Centroids centroids;

    std::size_t size() const noexcept { return centroids.k(); }
    std::size_t dim() const noexcept { return centroids.dim; }
};

/// Trains the visual dictionary over every frame feature of the corpus.
/// Word `i` is centroid `i`.
inline Dictionary build_dictionary(std::span<const FeatureVector> frame_features,
                                   std::size_t dict_size, std::uint64_t seed,
                                   std::size_t max_iters = 100, double tol = 1e-4) {
    if (dict_size > frame_features.size())
        throw InvalidArgument("build_dictionary: dict_size=" + std::to_string(dict_size) +
                              " exceeds frame count " + std::to_string(frame_features.size()));
    auto fit = kmeans_fit(frame_features, KMeansParams{dict_size, seed, max_iters, tol});
    return Dictionary{std::move(fit.centroids)};
}

/// Multiset of visual words; iteration is in ascending word order.
class VisualWordSet {
public:
    VisualWordSet() = default;
    VisualWordSet(std::initializer_list<WordId> words) {
        for (auto w : words) add(w);
    }

    void add(WordId word, std::uint32_t count = 1) {
        if (count == 0) throw InvalidArgument("VisualWordSet::add: zero multiplicity");
        counts_[word] += count;
    }

    bool contains(WordId word) const { return counts_.contains(word); }
    std::uint32_t multiplicity(WordId word) const {
        auto it = counts_.find(word);
        return it == counts_.end() ? 0u : it->second;
    }
    std::size_t size() const noexcept { return counts_.size(); }
    bool empty() const noexcept { return counts_.empty(); }

    auto begin() const { return counts_.begin(); }
    auto end() const { return counts_.end(); }

    std::vector<WordId> words() const {
        std::vector<WordId> out;
        out.reserve(counts_.size());
        for (const auto& [w, _] : counts_) out.push_back(w);
        return out;
    }

    friend bool operator==(const VisualWordSet&, const VisualWordSet&) = default;

private:
    std::map<WordId, std::uint32_t> counts_;
};

/// Soft assignment: the `n_w` nearest centroids, nearest first with ties to
/// the lower id, each with multiplicity 1.
inline VisualWordSet quantize(FeatureView v, const Dictionary& dict, std::size_t n_w) {
    if (n_w < 1 || n_w > dict.size())
        throw InvalidArgument("quantize: n_w=" + std::to_string(n_w) + " outside [1, " +
                              std::to_string(dict.size()) + "]");
    if (v.size() != dict.dim())
        throw InvalidArgument("quantize: dimension mismatch (" + std::to_string(v.size()) +
                              " vs " + std::to_string(dict.dim()) + ")");

    std::vector<std::pair<double, WordId>> dist;
    dist.reserve(dict.size());
    for (std::size_t i = 0; i < dict.size(); ++i)
        dist.emplace_back(l2_distance_sq(v, dict.centroids.vectors[i]), static_cast<WordId>(i));
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n_w), dist.end());

    VisualWordSet out;
    for (std::size_t i = 0; i < n_w; ++i) out.add(dist[i].second);
    return out;
}

/// Frame-level document frequencies (the IDF unit is the frame).
struct CorpusStats {
    std::uint64_t n_frames = 0;
    std::vector<std::uint64_t> doc_freq;
    std::uint64_t total_occurrences = 0;

    std::uint64_t doc_freq_of(WordId w) const noexcept {
        return w < doc_freq.size() ? doc_freq[w] : 0;
    }

    void add(const VisualWordSet& frame) {
        ++n_frames;
        for (const auto& [w, count] : frame) {
            if (w >= doc_freq.size()) doc_freq.resize(static_cast<std::size_t>(w) + 1, 0);
            ++doc_freq[w];
            total_occurrences += count;
        }
    }

    /// Commutative: merging partial folds in any order gives the same totals.
    void merge(const CorpusStats& other) {
        n_frames += other.n_frames;
        total_occurrences += other.total_occurrences;
        if (other.doc_freq.size() > doc_freq.size()) doc_freq.resize(other.doc_freq.size(), 0);
        for (std::size_t w = 0; w < other.doc_freq.size(); ++w) doc_freq[w] += other.doc_freq[w];
    }

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

template <std::ranges::input_range R>
    requires std::same_as<std::remove_cvref_t<std::ranges::range_reference_t<R>>, VisualWordSet>
CorpusStats accumulate_stats(R&& frame_word_sets) {
    CorpusStats stats;
    for (const VisualWordSet& s : frame_word_sets) stats.add(s);
    return stats;
}

/// tf * (ln((N + 1) / (N(w) + 1)) + 1).
inline double word_weight(std::uint64_t tf, WordId word, const CorpusStats& stats) {
    if (tf == 0) throw InvalidArgument("word_weight: tf must be at least 1");
    if (stats.n_frames == 0) throw InvalidArgument("word_weight: empty corpus statistics");
    const double n = static_cast<double>(stats.n_frames);
    const double nw = static_cast<double>(stats.doc_freq_of(word));
    return static_cast<double>(tf) * (std::log((n + 1.0) / (nw + 1.0)) + 1.0);
}

enum class WeightingMode : std::uint8_t {
    /// tf is the word's count inside the document being weighted.
    per_document = 0,
    /// tf is always 1; a word has one weight everywhere.
    global = 1,
};

inline std::string_view to_string(WeightingMode m) {
    return m == WeightingMode::global ? "global" : "per_document";
}

inline std::optional<WeightingMode> parse_weighting_mode(std::string_view s) {
    if (s == "per_document") return WeightingMode::per_document;
    if (s == "global") return WeightingMode::global;
    return std::nullopt;
}

struct WordWeight {
    WordId word;
    double weight;

    friend bool operator==(const WordWeight&, const WordWeight&) = default;
};

/// A frame, frame cluster or query image as word -> positive weight, sorted
/// by word id, with the total weight cached.
class WeightedWordDoc {
public:
    WeightedWordDoc() = default;

    explicit WeightedWordDoc(std::vector<WordWeight> entries) : entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const WordWeight& a, const WordWeight& b) { return a.word < b.word; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw InvalidArgument("WeightedWordDoc: weight of word " + std::to_string(e.word) +
                                      " must be positive and finite");
            if (i > 0 && entries_[i - 1].word == e.word)
                throw InvalidArgument("WeightedWordDoc: duplicate word " + std::to_string(e.word));
        }
        total_ = 0.0;
        for (const auto& e : entries_) total_ += e.weight;
    }

    WeightedWordDoc(std::initializer_list<WordWeight> entries)
        : WeightedWordDoc(std::vector<WordWeight>(entries)) {}

    std::span<const WordWeight> entries() const noexcept { return entries_; }
    double total_weight() const noexcept { return total_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// 0 when absent.
    double weight_of(WordId w) const noexcept {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), w,
                                   [](const WordWeight& e, WordId x) { return e.word < x; });
        return (it != entries_.end() && it->word == w) ? it->weight : 0.0;
    }

    bool contains(WordId w) const noexcept { return weight_of(w) > 0.0; }

    friend bool operator==(const WeightedWordDoc& a, const WeightedWordDoc& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<WordWeight> entries_;
    double total_ = 0.0;
};

inline WeightedWordDoc weigh_doc(const VisualWordSet& words, const CorpusStats& stats,
                                 WeightingMode mode) {
    std::vector<WordWeight> entries;
    entries.reserve(words.size());
    for (const auto& [w, count] : words) {
        const std::uint64_t tf = mode == WeightingMode::per_document ? count : 1;
        entries.push_back({w, word_weight(tf, w, stats)});
    }
    return WeightedWordDoc(std::move(entries));
}

}  // namespace vwii

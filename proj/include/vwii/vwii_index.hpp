#pragma once

// The visual weighted inverted index: one posting list per visual word,
// sorted by weight descending, plus a dense document table for random access
// and a versioned, checksummed on-disk format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "vwii/binary_io.hpp"
#include "vwii/bovw.hpp"
#include "vwii/cluster_builder.hpp"
#include "vwii/error.hpp"

namespace vwii {

using DocId = std::uint32_t;

struct Posting {
    DocId doc_id;
    double weight;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct DocRecord {
    std::uint32_t video_id = 0;
    std::uint32_t cluster_id = 0;
    WeightedWordDoc doc;

    double total_weight() const noexcept { return doc.total_weight(); }
    friend bool operator==(const DocRecord&, const DocRecord&) = default;
};

inline constexpr std::string_view kIndexMagic = "VWII";
inline constexpr std::uint32_t kIndexVersion = 1;

struct IndexTestAccess;

class VwiiIndex {
public:
    struct BuildOptions {
        WeightingMode mode = WeightingMode::per_document;
        /// Words per frame used at build time; queries are quantized the same way.
        std::uint32_t words_per_frame = 1;
        std::map<std::uint32_t, std::string> video_names;
    };

    VwiiIndex() = default;

    /// Doc ids are assigned densely in (video_id, cluster_id) order.
    static VwiiIndex build(std::span<const FrameCluster> clusters, Dictionary dictionary,
                           CorpusStats stats, BuildOptions options) {
        VwiiIndex idx;
        idx.dictionary_ = std::move(dictionary);
        idx.stats_ = std::move(stats);
        idx.mode_ = options.mode;
        idx.words_per_frame_ = options.words_per_frame;

        std::vector<const FrameCluster*> order;
        order.reserve(clusters.size());
        for (const auto& c : clusters) order.push_back(&c);
        std::sort(order.begin(), order.end(), [](const FrameCluster* a, const FrameCluster* b) {
            return std::tie(a->video_id, a->cluster_id) < std::tie(b->video_id, b->cluster_id);
        });
        for (std::size_t i = 1; i < order.size(); ++i)
            if (order[i - 1]->video_id == order[i]->video_id &&
                order[i - 1]->cluster_id == order[i]->cluster_id)
                throw InvalidArgument("VwiiIndex::build: duplicate cluster (video " +
                                      std::to_string(order[i]->video_id) + ", cluster " +
                                      std::to_string(order[i]->cluster_id) + ")");

        const std::size_t vocab = idx.dictionary_.size();
        idx.lists_.assign(vocab, {});
        idx.docs_.reserve(order.size());
        for (const FrameCluster* c : order) {
            const auto id = static_cast<DocId>(idx.docs_.size());
            for (const auto& e : c->doc.entries()) {
                if (e.word >= vocab)
                    throw InvalidArgument("VwiiIndex::build: word " + std::to_string(e.word) +
                                          " outside dictionary of size " + std::to_string(vocab));
                idx.lists_[e.word].push_back({id, e.weight});
            }
            idx.docs_.push_back({c->video_id, c->cluster_id, c->doc});
            idx.videos_.try_emplace(c->video_id, "");
        }
        for (auto& list : idx.lists_) sort_postings(list);

        for (auto& [vid, name] : idx.videos_) {
            auto it = options.video_names.find(vid);
            name = it != options.video_names.end() ? it->second : default_video_name(vid);
        }
        return idx;
    }

    static std::string default_video_name(std::uint32_t video_id) {
        return "video_" + std::to_string(video_id);
    }

    const Dictionary& dictionary() const noexcept { return dictionary_; }
    const CorpusStats& stats() const noexcept { return stats_; }
    WeightingMode mode() const noexcept { return mode_; }
    std::uint32_t words_per_frame() const noexcept { return words_per_frame_; }
    const std::map<std::uint32_t, std::string>& videos() const noexcept { return videos_; }

    std::size_t doc_count() const noexcept { return docs_.size(); }
    std::size_t vocabulary_size() const noexcept { return lists_.size(); }

    /// Number of words with at least one posting.
    std::size_t word_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(lists_.begin(), lists_.end(), [](const auto& l) { return !l.empty(); }));
    }

    std::span<const Posting> postings(WordId word) const noexcept {
        if (word >= lists_.size()) return {};
        return lists_[word];
    }

    /// Entry `position` of `word`'s list, or nullopt once the list is exhausted.
    std::optional<Posting> sorted_access(WordId word, std::size_t position) const noexcept {
        auto list = postings(word);
        if (position >= list.size()) return std::nullopt;
        return list[position];
    }

    const DocRecord& random_access(DocId id) const {
        if (id >= docs_.size())
            throw InvalidArgument("random_access: unknown doc_id " + std::to_string(id));
        return docs_[id];
    }

    std::span<const DocRecord> docs() const noexcept { return docs_; }

    const std::string& video_name(std::uint32_t video_id) const {
        auto it = videos_.find(video_id);
        if (it == videos_.end())
            throw InvalidArgument("unknown video_id " + std::to_string(video_id));
        return it->second;
    }

    /// Full scan of the structural invariants; returns one message per violation.
    std::vector<std::string> check_invariants() const {
        std::vector<std::string> out;
        std::vector<std::size_t> postings_per_doc(docs_.size(), 0);
        // seen_in[d] == w + 1 once doc d has been met in list w.
        std::vector<std::size_t> seen_in(docs_.size(), 0);
        for (std::size_t w = 0; w < lists_.size(); ++w) {
            const auto& list = lists_[w];
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto& p = list[i];
                auto where = [&] { return "list " + std::to_string(w) + " entry " + std::to_string(i); };
                if (!(p.weight > 0.0)) out.push_back(where() + ": non-positive weight");
                if (p.doc_id >= docs_.size()) {
                    out.push_back(where() + ": unknown doc " + std::to_string(p.doc_id));
                    continue;
                }
                if (seen_in[p.doc_id] == w + 1)
                    out.push_back(where() + ": duplicate doc " + std::to_string(p.doc_id));
                seen_in[p.doc_id] = w + 1;
                ++postings_per_doc[p.doc_id];
                if (docs_[p.doc_id].doc.weight_of(static_cast<WordId>(w)) != p.weight)
                    out.push_back(where() + ": weight differs from document record");
                if (i > 0 && !posting_before(list[i - 1], p))
                    out.push_back(where() + ": out of order");
            }
        }
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            const auto& rec = docs_[d];
            if (postings_per_doc[d] != rec.doc.size())
                out.push_back("doc " + std::to_string(d) + ": " + std::to_string(rec.doc.size()) +
                              " words but " + std::to_string(postings_per_doc[d]) + " postings");
            double sum = 0.0;
            for (const auto& e : rec.doc.entries()) sum += e.weight;
            if (std::abs(sum - rec.total_weight()) > 1e-9 * std::max(1.0, std::abs(sum)))
                out.push_back("doc " + std::to_string(d) + ": cached total weight mismatch");
            if (!videos_.contains(rec.video_id))
                out.push_back("doc " + std::to_string(d) + ": video " +
                              std::to_string(rec.video_id) + " has no name entry");
        }
        return out;
    }

    // Persistence --------------------------------------------------------

    std::string serialize() const {
        io::ByteWriter body;
        body.put_u8(static_cast<std::uint8_t>(mode_));
        body.put_u32(words_per_frame_);

        body.put_u32(static_cast<std::uint32_t>(dictionary_.size()));
        body.put_u32(static_cast<std::uint32_t>(dictionary_.dim()));
        body.put_f64(dictionary_.centroids.inertia);
        for (const auto& c : dictionary_.centroids.vectors)
            for (double x : c) body.put_f64(x);

        body.put_u64(stats_.n_frames);
        body.put_u64(stats_.total_occurrences);
        body.put_u32(static_cast<std::uint32_t>(stats_.doc_freq.size()));
        for (auto df : stats_.doc_freq) body.put_u64(df);

        body.put_u32(static_cast<std::uint32_t>(videos_.size()));
        for (const auto& [vid, name] : videos_) {
            body.put_u32(vid);
            body.put_string(name);
        }

        body.put_u32(static_cast<std::uint32_t>(docs_.size()));
        for (const auto& rec : docs_) {
            body.put_u32(rec.video_id);
            body.put_u32(rec.cluster_id);
            body.put_u32(static_cast<std::uint32_t>(rec.doc.size()));
            for (const auto& e : rec.doc.entries()) {
                body.put_u32(e.word);
                body.put_f64(e.weight);
            }
        }

        body.put_u32(static_cast<std::uint32_t>(word_count()));
        for (std::size_t w = 0; w < lists_.size(); ++w) {
            if (lists_[w].empty()) continue;
            body.put_u32(static_cast<std::uint32_t>(w));
            body.put_u32(static_cast<std::uint32_t>(lists_[w].size()));
            for (const auto& p : lists_[w]) {
                body.put_u32(p.doc_id);
                body.put_f64(p.weight);
            }
        }

        io::ByteWriter file;
        file.put_bytes(kIndexMagic);
        file.put_u32(kIndexVersion);
        file.put_u64(body.size());
        file.put_bytes(body.bytes());
        file.put_u32(io::crc32(file.bytes()));
        return std::move(file).take();
    }

    static VwiiIndex deserialize(std::string_view bytes) {
        constexpr std::size_t header = 4 + 4 + 8;
        if (bytes.size() < 4)
            throw FormatError(FormatErrc::truncated, bytes.size(), "file shorter than magic");
        if (bytes.substr(0, 4) != kIndexMagic)
            throw FormatError(FormatErrc::bad_magic, 0, "not a VWII index");
        io::ByteReader head(bytes.substr(0, std::min(bytes.size(), header)));
        head.get_bytes(4);
        const auto version = head.get_u32();
        if (version != kIndexVersion)
            throw FormatError(FormatErrc::unsupported_version, 4,
                              "index version " + std::to_string(version) + ", expected " +
                                  std::to_string(kIndexVersion));
        const auto body_len = head.get_u64();
        if (bytes.size() - header < body_len || bytes.size() - header - body_len < 4)
            throw FormatError(FormatErrc::truncated, bytes.size(),
                              "expected " + std::to_string(body_len + header + 4) + " bytes");
        const std::size_t end = header + static_cast<std::size_t>(body_len);
        if (bytes.size() != end + 4)
            throw FormatError(FormatErrc::invalid_content, end + 4, "trailing bytes after checksum");
        io::ByteReader tail(bytes.substr(end), end);
        const auto stored = tail.get_u32();
        if (stored != io::crc32(bytes.substr(0, end)))
            throw FormatError(FormatErrc::checksum_mismatch, end, "checksum mismatch");

        try {
            return decode_body(bytes.substr(header, static_cast<std::size_t>(body_len)), header);
        } catch (const FormatError& e) {
            // The checksum matched, so a short read means the writer was inconsistent.
            if (e.code() == FormatErrc::truncated)
                throw FormatError(FormatErrc::invalid_content, e.offset(), e.what());
            throw;
        }
    }

    void save(const std::filesystem::path& path) const { io::write_file_atomic(path, serialize()); }

    static VwiiIndex load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

private:
    friend struct IndexTestAccess;

    static bool posting_before(const Posting& a, const Posting& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.doc_id < b.doc_id;
    }

    static void sort_postings(std::vector<Posting>& list) {
        std::sort(list.begin(), list.end(), posting_before);
    }

    static VwiiIndex decode_body(std::string_view body, std::uint64_t base) {
        io::ByteReader r(body, base);
        VwiiIndex idx;

        const auto mode = r.get_u8();
        if (mode > static_cast<std::uint8_t>(WeightingMode::global))
            throw FormatError(FormatErrc::invalid_content, r.offset() - 1, "unknown weighting mode");
        idx.mode_ = static_cast<WeightingMode>(mode);
        idx.words_per_frame_ = r.get_u32();

        const auto k = r.get_u32();
        const auto dim = r.get_u32();
        idx.dictionary_.centroids.dim = dim;
        idx.dictionary_.centroids.inertia = r.get_f64();
        if (static_cast<std::uint64_t>(k) * dim * 8 > r.remaining())
            throw FormatError(FormatErrc::invalid_content, r.offset(), "dictionary larger than file");
        idx.dictionary_.centroids.vectors.assign(k, FeatureVector(dim));
        for (auto& c : idx.dictionary_.centroids.vectors)
            for (auto& x : c) x = r.get_f64();

        idx.stats_.n_frames = r.get_u64();
        idx.stats_.total_occurrences = r.get_u64();
        const auto df_len = r.get_u32();
        if (static_cast<std::uint64_t>(df_len) * 8 > r.remaining())
            throw FormatError(FormatErrc::invalid_content, r.offset(), "doc_freq larger than file");
        idx.stats_.doc_freq.resize(df_len);
        for (auto& df : idx.stats_.doc_freq) df = r.get_u64();

        const auto n_videos = r.get_u32();
        for (std::uint32_t i = 0; i < n_videos; ++i) {
            const auto vid = r.get_u32();
            if (!idx.videos_.emplace(vid, r.get_string()).second)
                throw FormatError(FormatErrc::invalid_content, r.offset(), "duplicate video entry");
        }

        const auto n_docs = r.get_u32();
        if (static_cast<std::uint64_t>(n_docs) * 12 > r.remaining())
            throw FormatError(FormatErrc::invalid_content, r.offset(), "doc table larger than file");
        idx.docs_.reserve(n_docs);
        for (std::uint32_t d = 0; d < n_docs; ++d) {
            DocRecord rec;
            rec.video_id = r.get_u32();
            rec.cluster_id = r.get_u32();
            const auto n_words = r.get_u32();
            if (static_cast<std::uint64_t>(n_words) * 12 > r.remaining())
                throw FormatError(FormatErrc::invalid_content, r.offset(), "document larger than file");
            std::vector<WordWeight> entries(n_words);
            for (auto& e : entries) {
                e.word = r.get_u32();
                e.weight = r.get_f64();
            }
            try {
                rec.doc = WeightedWordDoc(std::move(entries));
            } catch (const InvalidArgument& e) {
                throw FormatError(FormatErrc::invalid_content, r.offset(), e.what());
            }
            idx.docs_.push_back(std::move(rec));
        }

        idx.lists_.assign(k, {});
        const auto n_lists = r.get_u32();
        for (std::uint32_t i = 0; i < n_lists; ++i) {
            const auto word = r.get_u32();
            const auto len = r.get_u32();
            if (word >= k || !idx.lists_[word].empty() || len == 0)
                throw FormatError(FormatErrc::invalid_content, r.offset(),
                                  "bad posting list header for word " + std::to_string(word));
            if (static_cast<std::uint64_t>(len) * 12 > r.remaining())
                throw FormatError(FormatErrc::invalid_content, r.offset(), "posting list larger than file");
            auto& list = idx.lists_[word];
            list.resize(len);
            for (auto& p : list) {
                p.doc_id = r.get_u32();
                p.weight = r.get_f64();
            }
        }
        if (!r.at_end())
            throw FormatError(FormatErrc::invalid_content, r.offset(), "unparsed bytes in body");

        auto problems = idx.check_invariants();
        if (!problems.empty())
            throw FormatError(FormatErrc::invalid_content, base, "index invariant violated: " + problems.front());
        return idx;
    }

    Dictionary dictionary_;
    CorpusStats stats_;
    WeightingMode mode_ = WeightingMode::per_document;
    std::uint32_t words_per_frame_ = 1;
    std::vector<std::vector<Posting>> lists_;
    std::vector<DocRecord> docs_;
    std::map<std::uint32_t, std::string> videos_;
};

/// Hooks for tests and `verify --corrupt-postings`; never used on a serving path.
struct IndexTestAccess {
    /// Reverses every posting list, breaking the descending-weight order.
    static void reverse_posting_lists(VwiiIndex& idx) {
        for (auto& list : idx.lists_) std::reverse(list.begin(), list.end());
    }

    static std::vector<Posting>& list(VwiiIndex& idx, WordId w) { return idx.lists_.at(w); }
};

}  // namespace vwii

#pragma once

// Implementations of the `vwii` subcommands. Each returns a process exit code
// and writes line-oriented `kind key=value ...` records to `out`; diagnostics
// go to `err`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vwii/bench.hpp"
#include "vwii/binary_io.hpp"
#include "vwii/error.hpp"
#include "vwii/feature_file.hpp"
#include "vwii/manifest.hpp"
#include "vwii/pipeline.hpp"
#include "vwii/search.hpp"
#include "vwii/synthetic.hpp"
#include "vwii/vwii_index.hpp"

namespace vwii::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kBadInput = 2,
    kVerificationFailed = 3,
    kMissingInput = 4,
};

inline constexpr std::string_view kFeatureExtension = ".cvw";

/// `*.cvw` files directly inside `dir`, sorted by file name.
inline std::vector<fs::path> list_feature_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == kFeatureExtension) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline int report_error(const std::exception& e, std::ostream& err, const std::string& context = {}) {
    err << "error: " << (context.empty() ? "" : context + ": ") << e.what() << "\n";
    if (auto* fe = dynamic_cast<const FormatError*>(&e))
        return fe->code() == FormatErrc::io ? kMissingInput : kBadInput;
    if (dynamic_cast<const InvalidArgument*>(&e)) return kBadInput;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kMissingInput;
    return kUsage;
}

inline bool require_exists(const fs::path& p, std::ostream& err) {
    if (fs::exists(p)) return true;
    err << "error: missing input " << p.string() << "\n";
    return false;
}

inline std::string fixed6(double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << x;
    return s.str();
}

inline void write_stats(std::ostream& out, const SearchStats& s) {
    out << "stats sorted_accesses=" << s.sorted_accesses << " random_accesses=" << s.random_accesses
        << " candidates_seen=" << s.candidates_seen << " full_scores_computed=" << s.full_scores_computed << "\n";
}

/// First record of a query file; extra records are ignored with a warning.
inline FeatureVector read_query_features(const fs::path& path, std::ostream& err) {
    FeatureFile f;
    try {
        f = read_feature_file(path);
    } catch (const FormatError& e) {
        throw FormatError(e.code(), e.offset(), path.string() + ": " + e.detail());
    }
    if (f.records.empty())
        throw FormatError(FormatErrc::invalid_content, kFeatureHeaderSize, path.string() + ": no records");
    if (f.records.size() > 1)
        err << "warning: " << path.string() << " holds " << f.records.size()
            << " records; only the first is used\n";
    return f.records.front().to_vector();
}

}  // namespace detail

// build ---------------------------------------------------------------------

struct BuildCommand {
    fs::path features_dir;
    fs::path manifest;
    BuildConfig config;
    fs::path out;
};

inline int cmd_build(const BuildCommand& cmd, std::ostream& out, std::ostream& err) {
    if (!detail::require_exists(cmd.features_dir, err) || !detail::require_exists(cmd.manifest, err))
        return kMissingInput;
    std::vector<FeatureFile> files;
    for (const auto& p : list_feature_files(cmd.features_dir)) {
        try {
            files.push_back(read_feature_file(p));
        } catch (const FormatError& e) {
            return detail::report_error(e, err, p.string());
        }
    }
    try {
        const Manifest manifest = read_manifest(cmd.manifest);
        auto built = build_corpus_index(files, manifest, cmd.config);
        built.index.save(cmd.out);
        const auto& s = built.summary;
        out << "build videos=" << s.videos << " frames=" << s.frames << " docs=" << s.docs << " words=" << s.words
            << " dict_size=" << cmd.config.dict_size << " words_per_frame=" << cmd.config.words_per_frame
            << " mode=" << to_string(cmd.config.mode) << " out=" << cmd.out.string() << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return detail::report_error(e, err);
    }
}

// query ---------------------------------------------------------------------

struct QueryCommand {
    fs::path index;
    fs::path query;
    std::size_t k = 10;
    std::size_t xi = 8;
    std::optional<double> epsilon;
    bool exact = false;
};

inline int cmd_query(const QueryCommand& cmd, std::ostream& out, std::ostream& err) {
    if (!detail::require_exists(cmd.index, err) || !detail::require_exists(cmd.query, err))
        return kMissingInput;
    try {
        const VwiiIndex index = VwiiIndex::load(cmd.index);
        const auto features = detail::read_query_features(cmd.query, err);
        QuerySpec q{make_query_doc(index, features), cmd.k, cmd.xi, cmd.epsilon};
        const QueryResult r = cmd.exact ? brute_force_videos(index, q) : topk_videos(index, q);
        for (std::size_t i = 0; i < r.videos.size(); ++i) {
            const auto& v = r.videos[i];
            out << "result rank=" << i + 1 << " video=" << index.video_name(v.video_id) << " video_id=" << v.video_id
                << " score=" << detail::fixed6(v.score) << " cluster=" << v.best_cluster_id
                << " matched_words=" << v.matched_words << "\n";
        }
        detail::write_stats(out, r.stats);
        return kOk;
    } catch (const std::exception& e) {
        return detail::report_error(e, err);
    }
}

// synth ---------------------------------------------------------------------

struct SynthCommand {
    synth::SceneCorpusConfig config;
    fs::path out_dir;
    std::string model = "synthetic-gaussian";
};

struct PlantedTruth {
    std::string query_file;
    std::uint32_t video_id;
    std::uint32_t frame_index;
};

inline std::vector<PlantedTruth> read_planted_truth(const fs::path& path) {
    std::vector<PlantedTruth> out;
    std::istringstream in(io::read_file(path));
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        PlantedTruth t{};
        char file[512];
        unsigned vid = 0, frame = 0;
        if (std::sscanf(line.c_str(), "planted query=%511s video_id=%u frame_index=%u", file, &vid, &frame) != 3)
            throw FormatError(FormatErrc::invalid_content, line_no, "bad planted truth line");
        t.query_file = file;
        t.video_id = vid;
        t.frame_index = frame;
        out.push_back(std::move(t));
    }
    return out;
}

inline int cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        const auto corpus = synth::make_scene_corpus(cmd.config);
        fs::create_directories(cmd.out_dir / "features");
        fs::create_directories(cmd.out_dir / "queries");

        Manifest manifest;
        manifest.model = cmd.model;
        manifest.sampling_interval = cmd.config.frame_interval;
        std::size_t frames = 0;
        for (std::size_t v = 0; v < corpus.videos.size(); ++v) {
            std::ostringstream name;
            name << "video_" << std::setw(4) << std::setfill('0') << v;
            write_feature_file(cmd.out_dir / "features" / (name.str() + std::string(kFeatureExtension)),
                               corpus.videos[v]);
            manifest.videos[static_cast<std::uint32_t>(v)] = name.str();
            frames += corpus.videos[v].records.size();
        }
        write_manifest(cmd.out_dir / "manifest.txt", manifest);

        std::ostringstream truth;
        truth << "# planted queries: source video and frame of each query\n";
        for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
            std::ostringstream name;
            name << "query_" << std::setw(4) << std::setfill('0') << i << kFeatureExtension;
            write_feature_file(cmd.out_dir / "queries" / name.str(), corpus.queries[i].file);
            truth << "planted query=" << name.str() << " video_id=" << corpus.queries[i].video_id
                  << " frame_index=" << corpus.queries[i].frame_index << "\n";
        }
        io::write_file_atomic(cmd.out_dir / "planted_truth.txt", truth.str());

        out << "synth videos=" << corpus.videos.size() << " frames=" << frames
            << " queries=" << corpus.queries.size() << " dim=" << cmd.config.dim
            << " out=" << cmd.out_dir.string() << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return detail::report_error(e, err);
    }
}

// verify --------------------------------------------------------------------

struct VerifyCommand {
    fs::path index;
    fs::path queries_dir;
    std::size_t k = 10;
    std::vector<std::size_t> xi_grid{1, 4, 16};
    double tolerance = 1e-9;
    /// Test hook: reverse every posting list before checking.
    bool corrupt_postings = false;
};

inline int cmd_verify(const VerifyCommand& cmd, std::ostream& out, std::ostream& err) {
    if (!detail::require_exists(cmd.index, err) || !detail::require_exists(cmd.queries_dir, err))
        return kMissingInput;
    try {
        VwiiIndex index = VwiiIndex::load(cmd.index);
        if (cmd.corrupt_postings) IndexTestAccess::reverse_posting_lists(index);

        std::size_t divergences = 0, comparisons = 0;
        for (const auto& problem : index.check_invariants()) {
            ++divergences;
            out << "divergence kind=index_invariant detail=\"" << problem << "\"\n";
        }

        const auto queries = list_feature_files(cmd.queries_dir);
        for (const auto& path : queries) {
            const auto features = detail::read_query_features(path, err);
            const auto doc = make_query_doc(index, features);
            const auto name = path.filename().string();
            for (const std::size_t xi : cmd.xi_grid) {
                QuerySpec q{doc, cmd.k, xi, std::nullopt};

                ++comparisons;
                auto fast = vwii_search(index, q).docs;
                auto oracle = brute_force_search(index, q).docs;
                if (oracle.size() > cmd.k) oracle.resize(cmd.k);
                bool same = fast.size() == oracle.size();
                for (std::size_t i = 0; same && i < fast.size(); ++i)
                    same = fast[i].doc_id == oracle[i].doc_id &&
                           std::abs(fast[i].score - oracle[i].score) <= cmd.tolerance;
                if (!same) {
                    ++divergences;
                    out << "divergence kind=docs query=" << name << " xi=" << xi << " vwii_len=" << fast.size()
                        << " brute_len=" << oracle.size() << "\n";
                }

                ++comparisons;
                const auto fast_v = topk_videos(index, q).videos;
                const auto oracle_v = brute_force_videos(index, q).videos;
                bool same_v = fast_v.size() == oracle_v.size();
                for (std::size_t i = 0; same_v && i < fast_v.size(); ++i)
                    same_v = fast_v[i].video_id == oracle_v[i].video_id &&
                             std::abs(fast_v[i].score - oracle_v[i].score) <= cmd.tolerance;
                if (!same_v) {
                    ++divergences;
                    out << "divergence kind=videos query=" << name << " xi=" << xi << "\n";
                }
            }
        }
        out << "verify queries=" << queries.size() << " comparisons=" << comparisons
            << " divergences=" << divergences << " result=" << (divergences == 0 ? "pass" : "fail") << "\n";
        return divergences == 0 ? kOk : kVerificationFailed;
    } catch (const std::exception& e) {
        return detail::report_error(e, err);
    }
}

// bench ---------------------------------------------------------------------

struct BenchCommand {
    fs::path index;
    fs::path workload_dir;
    std::size_t k = 10;
    std::size_t xi = 8;
    std::size_t repetitions = 3;
    std::optional<fs::path> plot;
    std::vector<std::size_t> plot_k_grid{1, 5, 10, 20, 50};
};

namespace detail {

template <class F>
double time_ms(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace detail

inline int cmd_bench(const BenchCommand& cmd, std::ostream& out, std::ostream& err) {
    if (!detail::require_exists(cmd.index, err) || !detail::require_exists(cmd.workload_dir, err))
        return kMissingInput;
    try {
        const VwiiIndex index = VwiiIndex::load(cmd.index);
        std::vector<std::pair<std::string, WeightedWordDoc>> workload;
        for (const auto& path : list_feature_files(cmd.workload_dir))
            workload.emplace_back(path.filename().string(),
                                  make_query_doc(index, detail::read_query_features(path, err)));
        if (workload.empty()) {
            err << "error: workload " << cmd.workload_dir.string() << " holds no queries\n";
            return kMissingInput;
        }
        if (cmd.repetitions < 1) throw InvalidArgument("bench: repetitions must be at least 1");

        // Warm-up pass, excluded from the report.
        for (const auto& [_, doc] : workload) {
            QuerySpec q{doc, cmd.k, cmd.xi, std::nullopt};
            (void)topk_videos(index, q);
            (void)brute_force_videos(index, q);
        }

        bench::Report report;
        for (std::size_t rep = 0; rep < cmd.repetitions; ++rep) {
            for (const auto& [name, doc] : workload) {
                QuerySpec q{doc, cmd.k, cmd.xi, std::nullopt};
                QueryResult fast, slow;
                bench::Row row;
                row.query = name;
                row.repetition = rep;
                row.vwii_ms = detail::time_ms([&] { fast = topk_videos(index, q); });
                row.brute_ms = detail::time_ms([&] { slow = brute_force_videos(index, q); });
                row.sorted_accesses = fast.stats.sorted_accesses;
                row.random_accesses = fast.stats.random_accesses;
                row.full_scores = fast.stats.full_scores_computed;
                row.brute_full_scores = slow.stats.full_scores_computed;
                report.rows.push_back(std::move(row));
            }
        }
        out << "bench index=" << cmd.index.string() << " docs=" << index.doc_count()
            << " queries=" << workload.size() << " repetitions=" << cmd.repetitions << " k=" << cmd.k
            << " xi=" << cmd.xi << "\n";
        report.write(out);

        if (cmd.plot) {
            std::vector<bench::SeriesPoint> fast_pts, slow_pts;
            for (const std::size_t k : cmd.plot_k_grid) {
                std::vector<double> f_ms, s_ms;
                for (const auto& [_, doc] : workload) {
                    QuerySpec q{doc, k, cmd.xi, std::nullopt};
                    f_ms.push_back(detail::time_ms([&] { (void)topk_videos(index, q); }));
                    s_ms.push_back(detail::time_ms([&] { (void)brute_force_videos(index, q); }));
                }
                fast_pts.push_back({static_cast<double>(k), bench::summarize(f_ms).median});
                slow_pts.push_back({static_cast<double>(k), bench::summarize(s_ms).median});
            }
            io::write_file_atomic(*cmd.plot,
                                  bench::svg_line_chart("Median query latency vs k", "k", "latency (ms)",
                                                        fast_pts, "threshold search", slow_pts, "brute force"));
            out << "plot path=" << cmd.plot->string() << "\n";
        }
        return kOk;
    } catch (const std::exception& e) {
        return detail::report_error(e, err);
    }
}

}  // namespace vwii::cli

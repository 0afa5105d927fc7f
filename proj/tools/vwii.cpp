#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vwii/commands.hpp"

namespace {

std::optional<std::size_t> parse_clusters_policy(const std::string& s) {
    if (s == "auto") return std::nullopt;
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || v == 0) throw CLI::ValidationError("--clusters", "expects 'auto' or a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace vwii;
    CLI::App app{"Image-to-video retrieval over a visual-word inverted index"};
    app.require_subcommand(1);

    cli::BuildCommand build;
    std::string clusters = "auto", mode = "per_document";
    auto* b = app.add_subcommand("build", "Build an index from a directory of feature files");
    b->add_option("--features", build.features_dir, "Directory of *.cvw feature files")->required();
    b->add_option("--manifest", build.manifest, "Manifest file")->required();
    b->add_option("--out", build.out, "Index output path")->required();
    b->add_option("--dict-size", build.config.dict_size, "Dictionary size")->capture_default_str();
    b->add_option("--words-per-frame", build.config.words_per_frame, "Visual words per frame (n_w)")
        ->capture_default_str();
    b->add_option("--clusters", clusters, "Clusters per video: 'auto' or an integer")->capture_default_str();
    b->add_option("--mode", mode, "Weighting mode: per_document or global")->capture_default_str();
    b->add_option("--seed", build.config.seed, "Random seed")->capture_default_str();
    b->add_option("--max-iters", build.config.max_iters, "K-means iteration cap")->capture_default_str();

    cli::QueryCommand query;
    double epsilon = 0.0;
    auto* q = app.add_subcommand("query", "Top-k videos for a query image");
    q->add_option("--index", query.index, "Index path")->required();
    q->add_option("--query", query.query, "Query feature file (first record is used)")->required();
    q->add_option("-k,--k", query.k, "Number of videos")->capture_default_str();
    q->add_option("--xi", query.xi, "Sorted accesses per list per round")->capture_default_str();
    auto* eps_opt = q->add_option("--epsilon", epsilon, "Minimum video score");
    q->add_flag("--exact", query.exact, "Score every document (brute force)");

    cli::SynthCommand synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic scene corpus with planted queries");
    s->add_option("--out", synth.out_dir, "Output directory")->required();
    s->add_option("--videos", synth.config.videos)->capture_default_str();
    s->add_option("--frames", synth.config.frames_per_video, "Frames per video")->capture_default_str();
    s->add_option("--scenes", synth.config.scenes, "Scenes per video")->capture_default_str();
    s->add_option("--dim", synth.config.dim)->capture_default_str();
    s->add_option("--queries", synth.config.planted_queries, "Planted query count")->capture_default_str();
    s->add_option("--noise", synth.config.noise, "Per-coordinate noise standard deviation")->capture_default_str();
    s->add_option("--seed", synth.config.seed)->capture_default_str();

    cli::VerifyCommand verify;
    auto* v = app.add_subcommand("verify", "Compare threshold search with brute force");
    v->add_option("--index", verify.index, "Index path")->required();
    v->add_option("--queries", verify.queries_dir, "Directory of query feature files")->required();
    v->add_option("-k,--k", verify.k)->capture_default_str();
    v->add_option("--xi", verify.xi_grid, "Grid of xi values")->capture_default_str();
    v->add_flag("--corrupt-postings", verify.corrupt_postings)->group("");

    cli::BenchCommand bench;
    std::string plot;
    auto* be = app.add_subcommand("bench", "Time threshold search against brute force");
    be->add_option("--index", bench.index, "Index path")->required();
    be->add_option("--workload", bench.workload_dir, "Directory of query feature files")->required();
    be->add_option("-k,--k", bench.k)->capture_default_str();
    be->add_option("--xi", bench.xi)->capture_default_str();
    be->add_option("--repetitions", bench.repetitions)->capture_default_str();
    be->add_option("--plot", plot, "Write an SVG of median latency against k");

    try {
        app.parse(argc, argv);
        if (*b) {
            build.config.clusters_per_video = parse_clusters_policy(clusters);
            const auto m = parse_weighting_mode(mode);
            if (!m) throw CLI::ValidationError("--mode", "expects per_document or global");
            build.config.mode = *m;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? cli::kOk : cli::kUsage;
    } catch (const std::invalid_argument&) {
        std::cerr << "error: --clusters expects 'auto' or a positive integer\n";
        return cli::kUsage;
    }

    if (*b) return cli::cmd_build(build, std::cout, std::cerr);
    if (*q) {
        if (*eps_opt) query.epsilon = epsilon;
        return cli::cmd_query(query, std::cout, std::cerr);
    }
    if (*s) return cli::cmd_synth(synth, std::cout, std::cerr);
    if (*v) return cli::cmd_verify(verify, std::cout, std::cerr);
    if (!plot.empty()) bench.plot = plot;
    return cli::cmd_bench(bench, std::cout, std::cerr);
}

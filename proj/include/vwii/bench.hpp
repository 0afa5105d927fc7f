#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace vwii::bench {

struct Row {
    std::string query;
    std::size_t repetition = 0;
    double vwii_ms = 0.0;
    double brute_ms = 0.0;
    std::uint64_t sorted_accesses = 0;
    std::uint64_t random_accesses = 0;
    std::uint64_t full_scores = 0;
    std::uint64_t brute_full_scores = 0;
};

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

/// Median averages the two middle values; p95 is nearest-rank.
inline Summary summarize(std::vector<double> xs) {
    Summary s;
    if (xs.empty()) return s;
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    const std::size_t n = xs.size();
    s.median = n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95 = xs[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

struct Report {
    std::vector<Row> rows;

    template <class Field>
    Summary aggregate(Field f) const {
        std::vector<double> xs;
        xs.reserve(rows.size());
        for (const auto& r : rows) xs.push_back(static_cast<double>(f(r)));
        return summarize(std::move(xs));
    }

    void write(std::ostream& out) const {
        for (const auto& r : rows)
            out << "row query=" << r.query << " rep=" << r.repetition << " vwii_ms=" << r.vwii_ms
                << " brute_ms=" << r.brute_ms << " sorted_accesses=" << r.sorted_accesses
                << " random_accesses=" << r.random_accesses << " full_scores=" << r.full_scores
                << " brute_full_scores=" << r.brute_full_scores << "\n";
        auto line = [&](const char* name, Summary s) {
            out << "aggregate metric=" << name << " mean=" << s.mean << " median=" << s.median
                << " p95=" << s.p95 << "\n";
        };
        line("vwii_ms", aggregate([](const Row& r) { return r.vwii_ms; }));
        line("brute_ms", aggregate([](const Row& r) { return r.brute_ms; }));
        line("sorted_accesses", aggregate([](const Row& r) { return r.sorted_accesses; }));
        line("random_accesses", aggregate([](const Row& r) { return r.random_accesses; }));
        line("full_scores", aggregate([](const Row& r) { return r.full_scores; }));
    }
};

struct SeriesPoint {
    double x;
    double y;
};

/// Static two-series line chart (e.g. median latency against k).
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<SeriesPoint>& a,
                                  const std::string& a_name, const std::vector<SeriesPoint>& b,
                                  const std::string& b_name) {
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double xmax = 1e-12, ymax = 1e-12;
    for (const auto* s : {&a, &b})
        for (const auto& p : *s) {
            xmax = std::max(xmax, p.x);
            ymax = std::max(ymax, p.y);
        }
    auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
    auto py = [&](double y) { return H - B - (H - T - B) * y / ymax; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    svg << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
        << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << ymax
        << "</text>\n";
    svg << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"end\" font-size=\"11\">"
        << xmax << "</text>\n";

    auto series = [&](const std::vector<SeriesPoint>& s, const char* color, const std::string& name, int slot) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : s) svg << px(p.x) << "," << py(p.y) << " ";
        svg << "\"/>\n";
        for (const auto& p : s)
            svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 * slot << "\" fill=\"" << color << "\">" << name
            << "</text>\n";
    };
    series(a, "#1f77b4", a_name, 1);
    series(b, "#d62728", b_name, 2);
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace vwii::bench

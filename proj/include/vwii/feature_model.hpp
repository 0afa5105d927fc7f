#pragma once

// Vector math and the k-means engine used for both dictionary training and
// per-video frame clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vwii/error.hpp"

namespace vwii {

using FeatureVector = std::vector<double>;
using FeatureView = std::span<const double>;

inline double l2_distance_sq(FeatureView a, FeatureView b) {
    if (a.size() != b.size())
        throw InvalidArgument("l2_distance_sq: dimension mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return acc;
}

inline bool all_finite(FeatureView v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

struct Centroids {
    std::vector<FeatureVector> vectors;
    std::size_t dim = 0;
    /// Sum of squared distances of the training points to their nearest centroid.
    double inertia = 0.0;

    std::size_t k() const noexcept { return vectors.size(); }
};

struct KMeansParams {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    /// Stop once an assignment step improves inertia by less than this.
    double tol = 1e-4;
};

struct KMeansFit {
    Centroids centroids;
    /// Nearest-centroid index of every training point under `centroids`.
    std::vector<std::size_t> labels;
    /// Inertia after each assignment step; non-increasing.
    std::vector<double> inertia_history;
    bool converged = false;

    std::size_t iterations() const noexcept { return inertia_history.size(); }
};

/// Index of the nearest centroid; ties go to the lowest index.
inline std::size_t kmeans_assign(FeatureView v, const Centroids& c) {
    if (c.k() == 0) throw InvalidArgument("kmeans_assign: no centroids");
    if (v.size() != c.dim)
        throw InvalidArgument("kmeans_assign: dimension mismatch (" + std::to_string(v.size()) +
                              " vs " + std::to_string(c.dim) + ")");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.k(); ++i) {
        const double d = l2_distance_sq(v, c.vectors[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

namespace detail {

// Draws are made from raw engine output so that runs are reproducible across
// standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t kmeanspp_seed_first(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline std::vector<FeatureVector> kmeanspp_init(std::span<const FeatureVector> points,
                                                std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<FeatureVector> centers;
    centers.reserve(k);
    std::vector<bool> chosen(n, false);

    std::size_t first = kmeanspp_seed_first(rng, n);
    centers.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = l2_distance_sq(points[i], centers[0]);

    while (centers.size() < k) {
        double total = 0.0;
        for (double x : d2) total += x;

        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                cum += d2[i];
                pick = i;
                if (cum > target) break;
            }
        }
        if (pick == n) {
            // All remaining mass is zero (duplicate points): take the first unused point.
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = true;
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], l2_distance_sq(points[i], centers.back()));
    }
    return centers;
}

}  // namespace detail

/// Lloyd's algorithm with seeded k-means++ initialization.
///
/// Each iteration assigns every point to its nearest centroid (recording the
/// inertia) and then moves centroids to the mean of their points. Iteration
/// stops when the assignment no longer changes, when an assignment step
/// improves inertia by less than `tol`, or after `max_iters` assignment
/// steps. The returned labels are always the nearest-centroid assignment for
/// the returned centroids. A cluster that becomes empty is reseeded with the
/// point farthest from its own centroid.
inline KMeansFit kmeans_fit(std::span<const FeatureVector> points, const KMeansParams& params) {
    const std::size_t n = points.size();
    const std::size_t k = params.k;
    if (n == 0) throw InvalidArgument("kmeans_fit: no points");
    if (k < 1) throw InvalidArgument("kmeans_fit: k must be at least 1");
    if (k > n)
        throw InvalidArgument("kmeans_fit: k=" + std::to_string(k) + " exceeds point count " +
                              std::to_string(n));
    if (params.max_iters < 1) throw InvalidArgument("kmeans_fit: max_iters must be at least 1");
    if (!(params.tol >= 0.0)) throw InvalidArgument("kmeans_fit: tol must be non-negative");

    const std::size_t dim = points[0].size();
    if (dim == 0) throw InvalidArgument("kmeans_fit: zero-dimensional points");
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i].size() != dim)
            throw InvalidArgument("kmeans_fit: point " + std::to_string(i) + " has dimension " +
                                  std::to_string(points[i].size()) + ", expected " +
                                  std::to_string(dim));
        if (!all_finite(points[i]))
            throw InvalidArgument("kmeans_fit: point " + std::to_string(i) + " is not finite");
    }

    std::mt19937_64 rng(params.seed);
    KMeansFit fit;
    fit.centroids.dim = dim;
    fit.centroids.vectors = detail::kmeanspp_init(points, k, rng);

    std::vector<std::size_t> labels(n), prev(n, k);
    std::vector<double> dist(n);

    for (std::size_t iter = 0;; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = kmeans_assign(points[i], fit.centroids);
            dist[i] = l2_distance_sq(points[i], fit.centroids.vectors[labels[i]]);
            inertia += dist[i];
        }
        fit.inertia_history.push_back(inertia);
        fit.centroids.inertia = inertia;

        if (labels == prev) {
            fit.converged = true;
            break;
        }
        if (iter > 0) {
            const double prev_inertia = fit.inertia_history[iter - 1];
            if (prev_inertia - inertia < params.tol) break;
        }
        if (iter + 1 >= params.max_iters) break;

        // Update step.
        std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[labels[i]];
            for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d)
                fit.centroids.vectors[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }

        bool any_empty = false;
        for (std::size_t c = 0; c < k; ++c) any_empty = any_empty || counts[c] == 0;
        if (any_empty) {
            for (std::size_t i = 0; i < n; ++i)
                dist[i] = l2_distance_sq(points[i], fit.centroids.vectors[labels[i]]);
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] != 0) continue;
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (dist[i] > dist[far]) far = i;
                fit.centroids.vectors[c] = points[far];
                --counts[labels[far]];
                labels[far] = c;
                counts[c] = 1;
                dist[far] = 0.0;
            }
        }
        prev = labels;
    }

    fit.labels = std::move(labels);
    return fit;
}

}  // namespace vwii

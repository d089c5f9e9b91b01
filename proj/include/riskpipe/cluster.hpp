#pragma once

// Clustering learners: k-means (k-means++ / Lloyd / restarts), agglomerative
// (Lance-Williams single/complete/average linkage) and DBSCAN.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

// ---- k-means ---------------------------------------------------------------

struct KmeansResult {
    Matrix centroids;
    std::vector<int> labels;
    double inertia = 0.0;
    std::vector<std::vector<double>> inertia_trace;  // per restart, per Lloyd iteration
};

namespace detail {

inline std::size_t nearest_centroid(const Matrix& centroids, const double* x) {
    std::size_t best = 0;
    double bd = squared_distance(centroids.row_ptr(0), x, centroids.cols);
    for (std::size_t c = 1; c < centroids.rows; ++c) {
        const double d = squared_distance(centroids.row_ptr(c), x, centroids.cols);
        if (d < bd) {  // strict: ties stay with the lowest centroid index
            bd = d;
            best = c;
        }
    }
    return best;
}

inline Matrix kmeans_pp_init(const Matrix& X, std::size_t k, Rng& rng) {
    Matrix centroids(k, X.cols);
    std::vector<double> dist2(X.rows, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.uniform_int(X.rows));
    std::copy(X.row_ptr(first), X.row_ptr(first) + X.cols, centroids.row_ptr(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) {
            dist2[i] = std::min(dist2[i],
                                squared_distance(centroids.row_ptr(c - 1), X.row_ptr(i), X.cols));
            total += dist2[i];
        }
        std::size_t pick;
        if (total == 0.0) {
            pick = static_cast<std::size_t>(rng.uniform_int(X.rows));
        } else {
            const double u = rng.uniform01() * total;
            double cum = 0.0;
            pick = X.rows - 1;
            for (std::size_t i = 0; i < X.rows; ++i) {
                cum += dist2[i];
                if (u < cum) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy(X.row_ptr(pick), X.row_ptr(pick) + X.cols, centroids.row_ptr(c));
    }
    return centroids;
}

}  // namespace detail

inline KmeansResult kmeans_fit(const Matrix& X, std::size_t n_clusters, std::size_t n_init,
                               std::size_t max_iter, double tol, std::uint64_t seed) {
    if (n_clusters == 0) throw std::invalid_argument("kmeans: n_clusters must be positive");
    if (n_clusters > X.rows)
        throw std::invalid_argument("kmeans: n_clusters exceeds the number of rows");

    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < n_init; ++restart) {
        Rng rng(derive_seed(seed, restart));
        Matrix centroids = detail::kmeans_pp_init(X, n_clusters, rng);
        std::vector<int> labels(X.rows, 0);
        std::vector<double> trace;
        double inertia = 0.0;
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            // Assignment step.
            inertia = 0.0;
            for (std::size_t i = 0; i < X.rows; ++i) {
                labels[i] = static_cast<int>(detail::nearest_centroid(centroids, X.row_ptr(i)));
                inertia += squared_distance(centroids.row_ptr(labels[i]), X.row_ptr(i), X.cols);
            }
            trace.push_back(inertia);
            // Update step.
            Matrix next(n_clusters, X.cols);
            std::vector<std::size_t> counts(n_clusters, 0);
            for (std::size_t i = 0; i < X.rows; ++i) {
                ++counts[static_cast<std::size_t>(labels[i])];
                for (std::size_t c = 0; c < X.cols; ++c)
                    next(static_cast<std::size_t>(labels[i]), c) += X(i, c);
            }
            std::vector<bool> used(X.rows, false);
            for (std::size_t c = 0; c < n_clusters; ++c) {
                if (counts[c] > 0) {
                    for (std::size_t j = 0; j < X.cols; ++j)
                        next(c, j) /= static_cast<double>(counts[c]);
                } else {
                    // Re-seed an empty cluster at the unused point farthest
                    // from its assigned centroid (empty clusters handled in
                    // ascending index order).
                    std::size_t far = 0;
                    double fd = -1.0;
                    for (std::size_t i = 0; i < X.rows; ++i) {
                        if (used[i]) continue;
                        const double d = squared_distance(
                            centroids.row_ptr(static_cast<std::size_t>(labels[i])),
                            X.row_ptr(i), X.cols);
                        if (d > fd) {
                            fd = d;
                            far = i;
                        }
                    }
                    used[far] = true;
                    std::copy(X.row_ptr(far), X.row_ptr(far) + X.cols, next.row_ptr(c));
                }
            }
            // Convergence: total squared centroid movement below tol.
            double movement = 0.0;
            for (std::size_t c = 0; c < n_clusters; ++c)
                movement += squared_distance(next.row_ptr(c), centroids.row_ptr(c), X.cols);
            centroids = std::move(next);
            if (movement < tol) break;
        }
        // Final assignment against the last centroids.
        inertia = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) {
            labels[i] = static_cast<int>(detail::nearest_centroid(centroids, X.row_ptr(i)));
            inertia += squared_distance(centroids.row_ptr(labels[i]), X.row_ptr(i), X.cols);
        }
        trace.push_back(inertia);
        best.inertia_trace.push_back(trace);
        if (inertia < best.inertia) {  // strict: ties keep the first restart
            best.inertia = inertia;
            best.centroids = centroids;
            best.labels = labels;
        }
    }
    return best;
}

// ---- agglomerative ----------------------------------------------------------

enum class Linkage { single, complete, average };

inline Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    throw std::invalid_argument("unknown linkage '" + s + "' (single|complete|average)");
}

inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "";
}

struct AggResult {
    std::vector<std::pair<int, int>> merges;  // (i, j), i < j, j absorbed into i
    std::vector<int> labels;                  // labels for the requested n_clusters
};

namespace detail {

/// Labels after applying the first `n - k` merges, canonicalized so cluster
/// ids follow the order of each cluster's smallest member row.
inline std::vector<int> agg_labels_for_k(std::size_t n,
                                         const std::vector<std::pair<int, int>>& merges,
                                         std::size_t k) {
    std::vector<int> rep(n);
    std::iota(rep.begin(), rep.end(), 0);
    const std::size_t n_merges = n - k;
    for (std::size_t m = 0; m < n_merges; ++m)
        for (std::size_t i = 0; i < n; ++i)
            if (rep[i] == merges[m].second) rep[i] = merges[m].first;
    std::map<int, int> canon;  // representative -> label, keyed by smallest member
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [it, inserted] = canon.emplace(rep[i], static_cast<int>(canon.size()));
        labels[i] = it->second;
    }
    return labels;
}

}  // namespace detail

inline AggResult agglomerative_fit(const Matrix& X, std::size_t n_clusters, Linkage linkage) {
    const std::size_t n = X.rows;
    if (n_clusters == 0) throw std::invalid_argument("agglomerative: n_clusters must be positive");
    if (n_clusters > n)
        throw std::invalid_argument("agglomerative: n_clusters exceeds the number of rows");

    // Pairwise Euclidean distances between active clusters.
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d[i][j] = d[j][i] = euclidean_distance(X.row_ptr(i), X.row_ptr(j), X.cols);
    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);

    AggResult out;
    for (std::size_t m = 0; m + n_clusters < n; ++m) {
        // Minimal-distance active pair; ties -> lexicographically smallest (i, j).
        std::size_t bi = 0, bj = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (d[i][j] < bd) {
                    bd = d[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // Lance-Williams update of distances to the merged cluster bi U bj.
        for (std::size_t t = 0; t < n; ++t) {
            if (!active[t] || t == bi || t == bj) continue;
            double nd = 0.0;
            switch (linkage) {
                case Linkage::single: nd = std::min(d[bi][t], d[bj][t]); break;
                case Linkage::complete: nd = std::max(d[bi][t], d[bj][t]); break;
                case Linkage::average:
                    nd = (size[bi] * d[bi][t] + size[bj] * d[bj][t]) / (size[bi] + size[bj]);
                    break;
            }
            d[bi][t] = d[t][bi] = nd;
        }
        size[bi] += size[bj];
        active[bj] = false;
        out.merges.emplace_back(static_cast<int>(bi), static_cast<int>(bj));
    }
    out.labels = detail::agg_labels_for_k(n, out.merges, n_clusters);
    return out;
}

// ---- DBSCAN ------------------------------------------------------------------

struct DbscanResult {
    std::vector<int> labels;  // -1 = noise
    std::vector<bool> core;
};

inline DbscanResult dbscan_fit(const Matrix& X, double eps, std::size_t min_samples) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_samples == 0) throw std::invalid_argument("dbscan: min_samples must be positive");
    const std::size_t n = X.rows;
    const double eps2 = eps * eps;

    // Closed-ball neighborhoods (a point counts itself).
    std::vector<std::vector<std::size_t>> nbr(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (squared_distance(X.row_ptr(i), X.row_ptr(j), X.cols) <= eps2)
                nbr[i].push_back(j);

    DbscanResult out;
    out.labels.assign(n, -2);  // -2 = unvisited
    out.core.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) out.core[i] = nbr[i].size() >= min_samples;

    int cluster = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.labels[i] != -2) continue;
        if (!out.core[i]) {
            out.labels[i] = -1;  // provisionally noise; may become a border point
            continue;
        }
        ++cluster;
        out.labels[i] = cluster;
        std::vector<std::size_t> queue = nbr[i];
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const std::size_t q = queue[qi];
            if (out.labels[q] == -1) out.labels[q] = cluster;  // border point
            if (out.labels[q] != -2) continue;
            out.labels[q] = cluster;
            if (out.core[q]) queue.insert(queue.end(), nbr[q].begin(), nbr[q].end());
        }
    }
    for (int& l : out.labels)
        if (l == -2) l = -1;
    return out;
}

/// Assign a new point to the cluster of the nearest core point within eps
/// (ties -> lowest core index), else noise.
inline int dbscan_predict_row(const Matrix& Xtrain, const DbscanResult& fit, double eps,
                              const double* x) {
    const double eps2 = eps * eps;
    double bd = std::numeric_limits<double>::infinity();
    int label = -1;
    for (std::size_t i = 0; i < Xtrain.rows; ++i) {
        if (!fit.core[i]) continue;
        const double d = squared_distance(Xtrain.row_ptr(i), x, Xtrain.cols);
        if (d <= eps2 && d < bd) {
            bd = d;
            label = fit.labels[i];
        }
    }
    return label;
}

}  // namespace riskpipe

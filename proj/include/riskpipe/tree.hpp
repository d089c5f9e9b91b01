#pragma once

// CART decision trees: greedy binary splits with midpoint thresholds, Gini or
// variance impurity, deterministic tie-breaking (lowest feature index, then
// lowest threshold).  Serves standalone and as the base learner for the
// forest and boosting ensembles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction (majority class value or mean)
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0
    std::size_t n_features = 0;

    double predict_row(const double* x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

struct CartParams {
    bool classification = true;       // Gini when true, variance otherwise
    std::size_t max_depth = SIZE_MAX; // SIZE_MAX = unlimited
    std::size_t max_features = SIZE_MAX;  // >= p selects all features
};

namespace detail {

inline double gini_impurity(const std::map<double, std::size_t>& counts, double n) {
    double s = 0.0;
    for (const auto& [cls, cnt] : counts) {
        const double p = static_cast<double>(cnt) / n;
        s += p * p;
    }
    return 1.0 - s;
}

struct NodeStats {
    double impurity = 0.0;
    double value = 0.0;  // leaf prediction
    bool pure = false;
};

inline NodeStats node_stats(const std::vector<double>& y, const std::vector<std::size_t>& rows,
                            bool classification) {
    NodeStats st;
    const double n = static_cast<double>(rows.size());
    if (classification) {
        std::map<double, std::size_t> counts;
        for (std::size_t r : rows) ++counts[y[r]];
        st.impurity = gini_impurity(counts, n);
        std::size_t best = 0;
        for (const auto& [cls, cnt] : counts)  // ties -> smallest class value (map order)
            if (cnt > best) {
                best = cnt;
                st.value = cls;
            }
        st.pure = counts.size() == 1;
    } else {
        double mean = 0.0;
        for (std::size_t r : rows) mean += y[r];
        mean /= n;
        double var = 0.0;
        double lo = y[rows[0]], hi = y[rows[0]];
        for (std::size_t r : rows) {
            var += (y[r] - mean) * (y[r] - mean);
            lo = std::min(lo, y[r]);
            hi = std::max(hi, y[r]);
        }
        st.impurity = var / n;
        st.value = mean;
        st.pure = lo == hi;
    }
    return st;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = -1.0;
    double left_impurity = 0.0;
    double right_impurity = 0.0;
};

/// Best split over the candidate features; ties resolved toward the lowest
/// feature index, then the lowest threshold (candidates are scanned in
/// ascending feature order and ascending threshold order, strict > wins).
inline SplitChoice best_split(const Matrix& X, const std::vector<double>& y,
                              const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& features, double node_impurity,
                              bool classification) {
    SplitChoice best;
    const double n = static_cast<double>(rows.size());
    std::vector<std::pair<double, double>> xy(rows.size());
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            xy[i] = {X(rows[i], f), y[rows[i]]};
        std::sort(xy.begin(), xy.end());
        if (classification) {
            std::map<double, std::size_t> right_counts, left_counts;
            for (const auto& [xv, yv] : xy) ++right_counts[yv];
            double nl = 0.0;
            for (std::size_t i = 0; i + 1 < xy.size(); ++i) {
                ++left_counts[xy[i].second];
                auto it = right_counts.find(xy[i].second);
                if (--it->second == 0) right_counts.erase(it);
                nl += 1.0;
                if (xy[i].first == xy[i + 1].first) continue;  // no distinct boundary
                const double thr = xy[i].first + 0.5 * (xy[i + 1].first - xy[i].first);
                const double nr = n - nl;
                const double il = gini_impurity(left_counts, nl);
                const double ir = gini_impurity(right_counts, nr);
                const double gain = node_impurity - (nl * il + nr * ir) / n;
                if (gain > best.gain) {
                    best = {true, f, thr, gain, il, ir};
                }
            }
        } else {
            // Incremental sums for O(n) variance scan.
            double sum_r = 0.0, sq_r = 0.0;
            for (const auto& [xv, yv] : xy) {
                sum_r += yv;
                sq_r += yv * yv;
            }
            double sum_l = 0.0, sq_l = 0.0, nl = 0.0;
            for (std::size_t i = 0; i + 1 < xy.size(); ++i) {
                sum_l += xy[i].second;
                sq_l += xy[i].second * xy[i].second;
                sum_r -= xy[i].second;
                sq_r -= xy[i].second * xy[i].second;
                nl += 1.0;
                if (xy[i].first == xy[i + 1].first) continue;
                const double thr = xy[i].first + 0.5 * (xy[i + 1].first - xy[i].first);
                const double nr = n - nl;
                const double il = std::max(0.0, sq_l / nl - (sum_l / nl) * (sum_l / nl));
                const double ir = std::max(0.0, sq_r / nr - (sum_r / nr) * (sum_r / nr));
                const double gain = node_impurity - (nl * il + nr * ir) / n;
                if (gain > best.gain) {
                    best = {true, f, thr, gain, il, ir};
                }
            }
        }
    }
    return best;
}

}  // namespace detail

/// Fit a CART tree on X[rows].  `rng` drives per-split feature subsampling
/// when params.max_features < p (drawn even order-independently: one subset
/// per visited node, children visited left before right).  `importance`,
/// when given, accumulates impurity-decrease weight per feature (unnormalized
/// n_node·imp − n_l·imp_l − n_r·imp_r, in node-count units).
inline Tree cart_fit(const Matrix& X, const std::vector<double>& y,
                     const std::vector<std::size_t>& rows, const CartParams& params, Rng& rng,
                     std::vector<double>* importance = nullptr) {
    if (rows.empty()) throw std::invalid_argument("cart: empty row set");
    Tree tree;
    tree.n_features = X.cols;

    struct Frame {
        std::vector<std::size_t> rows;
        std::size_t depth;
        int node;
    };
    // Explicit stack, children pushed right-then-left so left is processed
    // first: fixed node visit order keeps rng draws deterministic.
    std::vector<Frame> stack;
    tree.nodes.emplace_back();
    stack.push_back({rows, 0, 0});
    std::vector<std::size_t> all_features(X.cols);
    for (std::size_t f = 0; f < X.cols; ++f) all_features[f] = f;

    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        const detail::NodeStats st = detail::node_stats(y, fr.rows, params.classification);
        TreeNode& node = tree.nodes[fr.node];
        node.value = st.value;
        if (st.pure || fr.depth >= params.max_depth || fr.rows.size() < 2) continue;

        const std::vector<std::size_t>* features = &all_features;
        std::vector<std::size_t> subset;
        if (params.max_features < X.cols) {
            // Partial Fisher-Yates draw of max_features distinct indices,
            // then sorted so the tie rule stays "lowest feature index".
            std::vector<std::size_t> pool = all_features;
            for (std::size_t i = 0; i < params.max_features; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(rng.uniform_int(pool.size() - i));
                std::swap(pool[i], pool[j]);
                subset.push_back(pool[i]);
            }
            std::sort(subset.begin(), subset.end());
            features = &subset;
        }

        const detail::SplitChoice split = detail::best_split(
            X, y, fr.rows, *features, st.impurity, params.classification);
        if (!split.found) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : fr.rows)
            (X(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
        if (importance) {
            const double n = static_cast<double>(fr.rows.size());
            const double nl = static_cast<double>(left_rows.size());
            const double nr = static_cast<double>(right_rows.size());
            (*importance)[split.feature] += std::max(
                0.0, n * st.impurity - nl * split.left_impurity - nr * split.right_impurity);
        }
        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& nd = tree.nodes[fr.node];  // re-fetch: emplace may reallocate
        nd.feature = static_cast<int>(split.feature);
        nd.threshold = split.threshold;
        nd.left = li;
        nd.right = li + 1;
        stack.push_back({std::move(right_rows), fr.depth + 1, li + 1});
        stack.push_back({std::move(left_rows), fr.depth + 1, li});
    }
    return tree;
}

}  // namespace riskpipe

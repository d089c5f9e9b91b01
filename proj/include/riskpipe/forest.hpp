#pragma once

// Random forest: seeded bootstrap per tree, per-split feature subsampling,
// majority vote / mean aggregation, impurity-decrease feature importance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"
#include "riskpipe/tree.hpp"

namespace riskpipe {

struct ForestModel {
    std::vector<Tree> trees;
    bool classification = true;
    std::vector<double> importance;  // normalized to sum 1 (all-zero if no splits)
};

struct ForestParams {
    std::size_t n_estimators = 100;
    std::size_t max_depth = SIZE_MAX;
    std::size_t max_features = SIZE_MAX;  // resolved by the caller (sqrt(p) / p/3)
    bool bootstrap = true;
    bool classification = true;
};

inline ForestModel random_forest_fit(const Matrix& X, const std::vector<double>& y,
                                     const ForestParams& params, std::uint64_t seed) {
    ForestModel model;
    model.classification = params.classification;
    model.importance.assign(X.cols, 0.0);
    CartParams cart{params.classification, params.max_depth, params.max_features};
    std::vector<std::size_t> identity(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) identity[i] = i;

    for (std::size_t t = 0; t < params.n_estimators; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
            rows.resize(X.rows);
            for (std::size_t i = 0; i < X.rows; ++i)
                rows[i] = static_cast<std::size_t>(rng.uniform_int(X.rows));
        } else {
            rows = identity;
        }
        model.trees.push_back(cart_fit(X, y, rows, cart, rng, &model.importance));
    }
    double total = 0.0;
    for (double v : model.importance) total += v;
    if (total > 0.0)
        for (double& v : model.importance) v /= total;
    return model;
}

/// Majority vote across trees (ties -> smallest class value) or tree mean.
inline double forest_predict_row(const ForestModel& m, const double* x) {
    if (m.classification) {
        std::map<double, std::size_t> votes;
        for (const Tree& t : m.trees) ++votes[t.predict_row(x)];
        double best_cls = 0.0;
        std::size_t best = 0;
        for (const auto& [cls, cnt] : votes)
            if (cnt > best) {
                best = cnt;
                best_cls = cls;
            }
        return best_cls;
    }
    double s = 0.0;
    for (const Tree& t : m.trees) s += t.predict_row(x);
    return s / static_cast<double>(m.trees.size());
}

/// Per-class vote fraction aligned with `classes` (ascending).
inline std::vector<double> forest_vote_fractions(const ForestModel& m, const double* x,
                                                 const std::vector<double>& classes) {
    std::vector<double> p(classes.size(), 0.0);
    for (const Tree& t : m.trees) {
        const double v = t.predict_row(x);
        const auto it = std::lower_bound(classes.begin(), classes.end(), v);
        if (it != classes.end() && *it == v)
            p[static_cast<std::size_t>(it - classes.begin())] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(m.trees.size());
    return p;
}

}  // namespace riskpipe

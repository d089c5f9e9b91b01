#pragma once

// K-nearest neighbors on stored training data.  Distance ties break toward
// the lower training index; classification vote ties toward the smallest
// class value.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "riskpipe/matrix.hpp"

namespace riskpipe {

struct KnnModel {
    Matrix X;
    std::vector<double> y;
    std::size_t k = 5;
    bool classification = true;
};

namespace detail {

inline std::vector<std::size_t> knn_neighbors(const KnnModel& m, const double* x) {
    std::vector<std::pair<double, std::size_t>> ds(m.X.rows);
    for (std::size_t i = 0; i < m.X.rows; ++i)
        ds[i] = {squared_distance(m.X.row_ptr(i), x, m.X.cols), i};
    const std::size_t k = std::min(m.k, m.X.rows);
    std::partial_sort(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(k), ds.end());
    std::vector<std::size_t> idx(k);
    for (std::size_t t = 0; t < k; ++t) idx[t] = ds[t].second;
    return idx;
}

}  // namespace detail

inline double knn_predict_row(const KnnModel& m, const double* x) {
    const std::vector<std::size_t> nn = detail::knn_neighbors(m, x);
    if (m.classification) {
        std::map<double, std::size_t> votes;
        for (std::size_t i : nn) ++votes[m.y[i]];
        double best_cls = 0.0;
        std::size_t best = 0;
        for (const auto& [cls, cnt] : votes)  // ties -> smallest class value
            if (cnt > best) {
                best = cnt;
                best_cls = cls;
            }
        return best_cls;
    }
    double s = 0.0;
    for (std::size_t i : nn) s += m.y[i];
    return s / static_cast<double>(nn.size());
}

/// Neighbor vote fractions aligned with `classes` (ascending).
inline std::vector<double> knn_vote_fractions(const KnnModel& m, const double* x,
                                              const std::vector<double>& classes) {
    const std::vector<std::size_t> nn = detail::knn_neighbors(m, x);
    std::vector<double> p(classes.size(), 0.0);
    for (std::size_t i : nn) {
        const auto it = std::lower_bound(classes.begin(), classes.end(), m.y[i]);
        if (it != classes.end() && *it == m.y[i])
            p[static_cast<std::size_t>(it - classes.begin())] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(nn.size());
    return p;
}

}  // namespace riskpipe

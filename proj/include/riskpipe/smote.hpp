#pragma once

// SMOTE oversampling: every minority class is grown to the majority count by
// interpolating between a seeded-uniformly chosen member and one of its k
// nearest same-class neighbors.  Original rows are kept first, unchanged.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/log.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct SmoteResult {
    Matrix features;
    std::vector<double> target;
    std::size_t n_synthetic = 0;
};

/// Balance classes to the majority count.  Draws for each synthetic sample
/// come from a per-sample derived seed, so generation order cannot matter.
inline SmoteResult smote_balance(const Matrix& X, const std::vector<double>& y,
                                 std::size_t k_neighbors, std::uint64_t seed,
                                 Logger* log = nullptr) {
    if (X.rows != y.size()) throw std::invalid_argument("smote: row/label count mismatch");
    if (X.rows == 0) throw std::invalid_argument("smote: empty input");
    if (k_neighbors == 0) throw std::invalid_argument("smote: k_neighbors must be positive");

    // Class membership in ascending class-value order.
    std::map<double, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
    if (members.size() < 2)
        throw std::invalid_argument("smote: need at least two classes to balance");
    std::size_t majority = 0;
    for (const auto& [cls, rows] : members) majority = std::max(majority, rows.size());

    SmoteResult out;
    std::size_t extra = 0;
    for (const auto& [cls, rows] : members) extra += majority - rows.size();
    out.features = Matrix(X.rows + extra, X.cols);
    std::copy(X.data.begin(), X.data.end(), out.features.data.begin());
    out.target = y;
    out.target.reserve(X.rows + extra);

    std::size_t write = X.rows;
    std::size_t class_index = 0;
    for (const auto& [cls, rows] : members) {
        const std::size_t need = majority - rows.size();
        if (need > 0) {
            if (rows.size() < 2)
                throw std::invalid_argument(
                    "smote: minority class of size 1 has no neighbor to interpolate");
            std::size_t k = k_neighbors;
            if (k > rows.size() - 1) {
                k = rows.size() - 1;
                if (log)
                    log->warn("smote", "k_neighbors clamped to " + std::to_string(k) +
                                           " for a class of " + std::to_string(rows.size()) +
                                           " samples");
            }
            // k nearest same-class neighbors per member (ties by index).
            std::vector<std::vector<std::size_t>> nn(rows.size());
            for (std::size_t a = 0; a < rows.size(); ++a) {
                std::vector<std::pair<double, std::size_t>> ds;
                for (std::size_t b = 0; b < rows.size(); ++b) {
                    if (b == a) continue;
                    ds.emplace_back(
                        squared_distance(X.row_ptr(rows[a]), X.row_ptr(rows[b]), X.cols), b);
                }
                std::sort(ds.begin(), ds.end());
                for (std::size_t t = 0; t < k; ++t) nn[a].push_back(ds[t].second);
            }
            for (std::size_t s = 0; s < need; ++s) {
                Rng rng(derive_seed(seed, class_index, s));
                const std::size_t base = rng.uniform_int(rows.size());
                const std::size_t pick = nn[base][rng.uniform_int(k)];
                const double lambda = rng.uniform01();
                const double* xa = X.row_ptr(rows[base]);
                const double* xb = X.row_ptr(rows[pick]);
                for (std::size_t c = 0; c < X.cols; ++c)
                    out.features(write, c) = xa[c] + lambda * (xb[c] - xa[c]);
                out.target.push_back(cls);
                ++write;
                ++out.n_synthetic;
            }
        }
        ++class_index;
    }
    return out;
}

}  // namespace riskpipe

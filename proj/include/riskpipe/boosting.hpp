#pragma once

// Gradient boosting with regression-tree base learners.  Squared loss fits
// plain residuals from a mean initialization; binary log loss fits
// y − sigmoid(score) residuals from a log-odds initialization.  Multiclass is
// handled one-vs-rest by the model dispatch layer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "riskpipe/linear.hpp"  // sigmoid
#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"
#include "riskpipe/tree.hpp"

namespace riskpipe {

struct GbChain {
    double f0 = 0.0;
    std::vector<Tree> trees;
};

struct GbModel {
    std::vector<GbChain> chains;  // 1 chain (regression / binary), k chains (OvR)
    double learning_rate = 0.1;
    bool classification = false;
    std::vector<double> importance;  // normalized to sum 1 across all chains
};

struct GbParams {
    std::size_t n_estimators = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
};

namespace detail {

/// One boosting chain. `binary_log` selects log loss on y in {0,1};
/// otherwise squared loss on real targets.
inline GbChain gb_fit_chain(const Matrix& X, const std::vector<double>& y,
                            const GbParams& params, bool binary_log,
                            std::vector<double>* importance) {
    GbChain chain;
    const std::size_t n = X.rows;
    if (binary_log) {
        double p = 0.0;
        for (double v : y) p += v;
        p = std::clamp(p / static_cast<double>(n), 1e-10, 1.0 - 1e-10);
        chain.f0 = std::log(p / (1.0 - p));
    } else {
        for (double v : y) chain.f0 += v;
        chain.f0 /= static_cast<double>(n);
    }
    std::vector<double> score(n, chain.f0);
    std::vector<double> residual(n);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    CartParams cart{false, params.max_depth, SIZE_MAX};
    Rng rng(0);  // unused: full feature set means no subsampling draws

    for (std::size_t stage = 0; stage < params.n_estimators; ++stage) {
        for (std::size_t i = 0; i < n; ++i)
            residual[i] = binary_log ? y[i] - sigmoid(score[i]) : y[i] - score[i];
        Tree tree = cart_fit(X, residual, rows, cart, rng, importance);
        for (std::size_t i = 0; i < n; ++i)
            score[i] += params.learning_rate * tree.predict_row(X.row_ptr(i));
        chain.trees.push_back(std::move(tree));
    }
    return chain;
}

inline double gb_chain_score(const GbChain& chain, double learning_rate, const double* x) {
    double s = chain.f0;
    for (const Tree& t : chain.trees) s += learning_rate * t.predict_row(x);
    return s;
}

}  // namespace detail

/// Regression: single squared-loss chain.
inline GbModel gradient_boosting_fit_regression(const Matrix& X, const std::vector<double>& y,
                                                const GbParams& params) {
    GbModel m;
    m.learning_rate = params.learning_rate;
    m.classification = false;
    m.importance.assign(X.cols, 0.0);
    m.chains.push_back(detail::gb_fit_chain(X, y, params, false, &m.importance));
    double total = 0.0;
    for (double v : m.importance) total += v;
    if (total > 0.0)
        for (double& v : m.importance) v /= total;
    return m;
}

/// Classification: one log-loss chain per class when k > 2 (one-vs-rest),
/// a single chain against classes[1] when binary.  `y` holds class values,
/// `classes` their ascending distinct list.
inline GbModel gradient_boosting_fit_classification(const Matrix& X,
                                                    const std::vector<double>& y,
                                                    const std::vector<double>& classes,
                                                    const GbParams& params) {
    GbModel m;
    m.learning_rate = params.learning_rate;
    m.classification = true;
    m.importance.assign(X.cols, 0.0);
    const std::size_t n_chains = classes.size() == 2 ? 1 : classes.size();
    for (std::size_t c = 0; c < n_chains; ++c) {
        const double target_class = classes.size() == 2 ? classes[1] : classes[c];
        std::vector<double> yb(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) yb[i] = y[i] == target_class ? 1.0 : 0.0;
        m.chains.push_back(detail::gb_fit_chain(X, yb, params, true, &m.importance));
    }
    double total = 0.0;
    for (double v : m.importance) total += v;
    if (total > 0.0)
        for (double& v : m.importance) v /= total;
    return m;
}

/// Regression value, or (classification) per-class probabilities aligned
/// with `classes`: sigmoid of the binary chain, or normalized OvR sigmoids.
inline double gb_predict_value(const GbModel& m, const double* x) {
    return detail::gb_chain_score(m.chains[0], m.learning_rate, x);
}

inline std::vector<double> gb_predict_proba_row(const GbModel& m, const double* x,
                                                std::size_t n_classes) {
    std::vector<double> p(n_classes, 0.0);
    if (m.chains.size() == 1) {
        const double pp = sigmoid(detail::gb_chain_score(m.chains[0], m.learning_rate, x));
        p[0] = 1.0 - pp;
        p[1] = pp;
        return p;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < m.chains.size(); ++c) {
        p[c] = sigmoid(detail::gb_chain_score(m.chains[c], m.learning_rate, x));
        total += p[c];
    }
    if (total == 0.0) {
        for (double& v : p) v = 1.0 / static_cast<double>(n_classes);
    } else {
        for (double& v : p) v /= total;
    }
    return p;
}

}  // namespace riskpipe

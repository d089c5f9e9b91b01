#pragma once

// Linear learners: elastic-net coordinate descent and stochastic (sub)gradient
// descent for logistic / hinge / squared / epsilon-insensitive losses.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct LinearModel {
    std::vector<double> w;
    double b = 0.0;
};

inline double linear_score(const LinearModel& m, const double* x) {
    double s = m.b;
    for (std::size_t j = 0; j < m.w.size(); ++j) s += m.w[j] * x[j];
    return s;
}

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

namespace detail {
inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}
}  // namespace detail

/// Cyclic coordinate descent for
///   (1/(2n))‖y − Xβ − b‖² + alpha·(l1_ratio‖β‖₁ + (1−l1_ratio)/2·‖β‖²),
/// intercept unpenalized and refreshed once per sweep.  Stops when the
/// largest coordinate change in a sweep falls below tol.
inline LinearModel elastic_net_fit(const Matrix& X, const std::vector<double>& y, double alpha,
                                   double l1_ratio, std::size_t max_iter, double tol) {
    if (X.rows != y.size()) throw std::invalid_argument("elastic net: row/target mismatch");
    if (X.rows == 0) throw std::invalid_argument("elastic net: empty input");
    for (double v : X.data)
        if (!std::isfinite(v)) throw std::invalid_argument("elastic net: non-finite input");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("elastic net: non-finite input");

    const std::size_t n = X.rows, p = X.cols;
    const double nd = static_cast<double>(n);
    LinearModel m;
    m.w.assign(p, 0.0);
    m.b = std::accumulate(y.begin(), y.end(), 0.0) / nd;

    std::vector<double> z(p, 0.0);  // (1/n) Σ x²  per column
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) z[j] += X(i, j) * X(i, j);
        z[j] /= nd;
    }
    std::vector<double> r(n);  // residual y − Xβ − b
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - m.b;

    const double l1 = alpha * l1_ratio;
    const double l2 = alpha * (1.0 - l1_ratio);
    for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += X(i, j) * (r[i] + X(i, j) * m.w[j]);
            rho /= nd;
            const double den = z[j] + l2;
            const double wj = den == 0.0 ? 0.0 : detail::soft_threshold(rho, l1) / den;
            const double delta = wj - m.w[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) r[i] -= X(i, j) * delta;
                m.w[j] = wj;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        const double db = std::accumulate(r.begin(), r.end(), 0.0) / nd;
        if (db != 0.0) {
            m.b += db;
            for (double& ri : r) ri -= db;
        }
        if (max_delta < tol) break;
    }
    return m;
}

enum class SgdLoss { log, hinge, squared, epsilon_insensitive };

inline SgdLoss sgd_loss_from_string(const std::string& s) {
    if (s == "log") return SgdLoss::log;
    if (s == "hinge") return SgdLoss::hinge;
    if (s == "squared") return SgdLoss::squared;
    if (s == "epsilon_insensitive") return SgdLoss::epsilon_insensitive;
    throw std::invalid_argument("unknown SGD loss '" + s + "'");
}

inline std::string to_string(SgdLoss l) {
    switch (l) {
        case SgdLoss::log: return "log";
        case SgdLoss::hinge: return "hinge";
        case SgdLoss::squared: return "squared";
        case SgdLoss::epsilon_insensitive: return "epsilon_insensitive";
    }
    return "";
}

/// Seeded SGD over the regularized objective (1/n)Σ loss_i + (l2/2)‖w‖².
/// Classification losses (log, hinge) expect y in {0, 1}.  Step size decays
/// as eta_t = eta0 / (1 + eta0·l2·t) over the global step count t.
inline LinearModel sgd_linear_fit(const Matrix& X, const std::vector<double>& y, SgdLoss loss,
                                  double l2, std::size_t epochs, std::uint64_t seed,
                                  double epsilon = 0.1, double eta0 = 0.1) {
    if (X.rows != y.size()) throw std::invalid_argument("sgd: row/target mismatch");
    if (X.rows == 0) throw std::invalid_argument("sgd: empty input");
    const std::size_t n = X.rows, p = X.cols;
    LinearModel m;
    m.w.assign(p, 0.0);

    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = eta0 / (1.0 + eta0 * l2 * static_cast<double>(t));
            const double* x = X.row_ptr(i);
            const double s = linear_score(m, x);
            double g = 0.0;  // d loss / d score
            switch (loss) {
                case SgdLoss::log:
                    g = sigmoid(s) - y[i];
                    break;
                case SgdLoss::hinge: {
                    const double ys = 2.0 * y[i] - 1.0;
                    g = ys * s < 1.0 ? -ys : 0.0;
                    break;
                }
                case SgdLoss::squared:
                    g = s - y[i];
                    break;
                case SgdLoss::epsilon_insensitive: {
                    const double r = s - y[i];
                    g = r > epsilon ? 1.0 : (r < -epsilon ? -1.0 : 0.0);
                    break;
                }
            }
            for (std::size_t j = 0; j < p; ++j) m.w[j] -= eta * (l2 * m.w[j] + g * x[j]);
            m.b -= eta * g;
        }
    }
    return m;
}

}  // namespace riskpipe

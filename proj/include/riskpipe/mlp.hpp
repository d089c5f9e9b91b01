#pragma once

// Multi-layer perceptron trained by plain mini-batch SGD.  Classification
// uses a softmax output with cross-entropy (k outputs even when binary);
// regression uses a linear output with mean squared error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct MlpModel {
    std::vector<Matrix> W;               // W[l]: fan_out x fan_in
    std::vector<std::vector<double>> b;  // b[l]: fan_out
    std::string activation = "relu";     // relu | tanh | logistic | identity
    bool classification = false;
};

struct MlpParams {
    std::vector<std::size_t> hidden{64};
    std::string activation = "relu";
    double lr = 1e-3;
    std::size_t epochs = 200;
    std::size_t batch = 32;
};

namespace detail {

inline double activate(const std::string& a, double z) {
    if (a == "relu") return z > 0.0 ? z : 0.0;
    if (a == "tanh") return std::tanh(z);
    if (a == "logistic") return 1.0 / (1.0 + std::exp(-z));
    if (a == "identity") return z;
    throw std::invalid_argument("unknown activation '" + a + "'");
}

/// Derivative expressed through the activation value.
inline double activate_grad(const std::string& a, double act) {
    if (a == "relu") return act > 0.0 ? 1.0 : 0.0;
    if (a == "tanh") return 1.0 - act * act;
    if (a == "logistic") return act * (1.0 - act);
    return 1.0;  // identity
}

inline void softmax_row(double* p, std::size_t k) {
    double mx = p[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, p[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = std::exp(p[i] - mx);
        total += p[i];
    }
    for (std::size_t i = 0; i < k; ++i) p[i] /= total;
}

}  // namespace detail

/// Seeded uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)], layer
/// by layer, weights before biases.
inline MlpModel mlp_init(std::size_t n_in, const std::vector<std::size_t>& hidden,
                         std::size_t n_out, const std::string& activation,
                         bool classification, std::uint64_t seed) {
    MlpModel m;
    m.activation = activation;
    m.classification = classification;
    detail::activate(activation, 0.0);  // validate the name up front
    std::vector<std::size_t> sizes{n_in};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_out);
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
        const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix W(fan_out, fan_in);
        for (std::size_t o = 0; o < fan_out; ++o)
            for (std::size_t i = 0; i < fan_in; ++i)
                W(o, i) = (2.0 * rng.uniform01() - 1.0) * limit;
        std::vector<double> b(fan_out);
        for (std::size_t o = 0; o < fan_out; ++o) b[o] = (2.0 * rng.uniform01() - 1.0) * limit;
        m.W.push_back(std::move(W));
        m.b.push_back(std::move(b));
    }
    return m;
}

/// Network output for one input row: softmax probabilities (classification)
/// or raw outputs (regression).
inline std::vector<double> mlp_forward_row(const MlpModel& m, const double* x) {
    std::vector<double> a(x, x + m.W.front().cols);
    for (std::size_t l = 0; l < m.W.size(); ++l) {
        const Matrix& W = m.W[l];
        std::vector<double> z(W.rows);
        for (std::size_t o = 0; o < W.rows; ++o) {
            double s = m.b[l][o];
            const double* wrow = W.row_ptr(o);
            for (std::size_t i = 0; i < W.cols; ++i) s += wrow[i] * a[i];
            z[o] = s;
        }
        if (l + 1 < m.W.size())
            for (double& v : z) v = detail::activate(m.activation, v);
        a = std::move(z);
    }
    if (m.classification) detail::softmax_row(a.data(), a.size());
    return a;
}

struct MlpGradients {
    double loss = 0.0;
    std::vector<Matrix> dW;
    std::vector<std::vector<double>> db;
};

/// Batch loss and exact backpropagation gradients.  Y is batch x n_out:
/// one-hot rows for classification, target values for regression.
/// Loss: cross-entropy −(1/B)Σ log p(true)   |   MSE (1/B)ΣΣ (o−t)².
inline MlpGradients mlp_loss_and_gradients(const MlpModel& m, const Matrix& X,
                                           const Matrix& Y) {
    const std::size_t B = X.rows;
    const std::size_t L = m.W.size();
    if (B == 0) throw std::invalid_argument("mlp: empty batch");

    // Forward pass, keeping activations per layer (a[0] = input).
    std::vector<Matrix> a(L + 1);
    a[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        const Matrix& W = m.W[l];
        Matrix z(B, W.rows);
        for (std::size_t r = 0; r < B; ++r) {
            const double* in = a[l].row_ptr(r);
            for (std::size_t o = 0; o < W.rows; ++o) {
                double s = m.b[l][o];
                const double* wrow = W.row_ptr(o);
                for (std::size_t i = 0; i < W.cols; ++i) s += wrow[i] * in[i];
                z(r, o) = l + 1 < L ? detail::activate(m.activation, s) : s;
            }
        }
        a[l + 1] = std::move(z);
    }

    MlpGradients g;
    const double Bd = static_cast<double>(B);
    Matrix delta = a[L];  // B x n_out, becomes dLoss/dz_out
    if (m.classification) {
        for (std::size_t r = 0; r < B; ++r) detail::softmax_row(delta.row_ptr(r), delta.cols);
        for (std::size_t r = 0; r < B; ++r)
            for (std::size_t o = 0; o < delta.cols; ++o) {
                if (Y(r, o) == 1.0)
                    g.loss -= std::log(std::max(delta(r, o), 1e-300));
                delta(r, o) = (delta(r, o) - Y(r, o)) / Bd;
            }
        g.loss /= Bd;
    } else {
        for (std::size_t r = 0; r < B; ++r)
            for (std::size_t o = 0; o < delta.cols; ++o) {
                const double d = delta(r, o) - Y(r, o);
                g.loss += d * d;
                delta(r, o) = 2.0 * d / Bd;
            }
        g.loss /= Bd;
    }

    g.dW.resize(L);
    g.db.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& in = a[l];
        Matrix dW(m.W[l].rows, m.W[l].cols);
        std::vector<double> db(m.W[l].rows, 0.0);
        for (std::size_t r = 0; r < B; ++r)
            for (std::size_t o = 0; o < dW.rows; ++o) {
                const double d = delta(r, o);
                db[o] += d;
                double* drow = dW.row_ptr(o);
                const double* irow = in.row_ptr(r);
                for (std::size_t i = 0; i < dW.cols; ++i) drow[i] += d * irow[i];
            }
        g.dW[l] = std::move(dW);
        g.db[l] = std::move(db);
        if (l > 0) {
            Matrix prev(B, m.W[l].cols);
            for (std::size_t r = 0; r < B; ++r)
                for (std::size_t i = 0; i < m.W[l].cols; ++i) {
                    double s = 0.0;
                    for (std::size_t o = 0; o < m.W[l].rows; ++o)
                        s += delta(r, o) * m.W[l](o, i);
                    prev(r, i) = s * detail::activate_grad(m.activation, a[l](r, i));
                }
            delta = std::move(prev);
        }
    }
    return g;
}

/// Mini-batch SGD.  For classification `y` holds class values and `classes`
/// the ascending distinct list; for regression pass classes empty.
inline MlpModel mlp_fit(const Matrix& X, const std::vector<double>& y,
                        const std::vector<double>& classes, const MlpParams& params,
                        std::uint64_t seed) {
    const bool classification = !classes.empty();
    const std::size_t n_out = classification ? classes.size() : 1;
    MlpModel m = mlp_init(X.cols, params.hidden, n_out, params.activation, classification,
                          seed);
    const std::size_t n = X.rows;
    Matrix T(n, n_out);
    if (classification) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto it = std::lower_bound(classes.begin(), classes.end(), y[i]);
            T(i, static_cast<std::size_t>(it - classes.begin())) = 1.0;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) T(i, 0) = y[i];
    }

    Rng rng(derive_seed(seed, 1));  // separate stream from initialization
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = std::max<std::size_t>(1, params.batch);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            Matrix Xb(stop - start, X.cols), Yb(stop - start, n_out);
            for (std::size_t r = start; r < stop; ++r) {
                std::copy(X.row_ptr(order[r]), X.row_ptr(order[r]) + X.cols,
                          Xb.row_ptr(r - start));
                std::copy(T.row_ptr(order[r]), T.row_ptr(order[r]) + n_out,
                          Yb.row_ptr(r - start));
            }
            const MlpGradients g = mlp_loss_and_gradients(m, Xb, Yb);
            for (std::size_t l = 0; l < m.W.size(); ++l) {
                for (std::size_t k = 0; k < m.W[l].data.size(); ++k)
                    m.W[l].data[k] -= params.lr * g.dW[l].data[k];
                for (std::size_t o = 0; o < m.b[l].size(); ++o)
                    m.b[l][o] -= params.lr * g.db[l][o];
            }
        }
    }
    return m;
}

}  // namespace riskpipe

#pragma once

// Shapley-value feature attributions for fitted supervised models.
// Exact mode enumerates every coalition (guarded at 12 features); kernel mode
// solves a weighted least squares over coalitions with the Shapley kernel,
// with the empty and full coalitions imposed as equality constraints so local
// accuracy holds by construction.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/config.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/model.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct Attribution {
    double base_value = 0.0;          // model output at the background expectation
    std::vector<double> phi;          // per-feature contributions
    double explained_output = 0.0;    // model output at x
};

namespace detail {

/// Scalar model output to attribute.  Regression: predicted value.
/// Classification: probability of classes[class_index]; hinge-loss linear
/// models have no probabilities, so their decision score stands in.
inline double shap_model_output(const FittedModel& m, const double* x,
                                std::size_t class_index) {
    if (m.spec.task == Task::regression) return predict_value_row(m, x);
    if (m.spec.task != Task::classification)
        throw ModelError("attributions are defined for supervised models only");
    if (class_index >= m.classes.size()) throw ModelError("class index out of range");
    if (const auto* lp = std::get_if<LinearPayload>(&m.payload); lp && lp->loss == "hinge") {
        if (m.classes.size() == 2 && lp->members.size() == 1) {
            const double s = linear_score(lp->members[0], x);
            return class_index == 1 ? s : -s;
        }
        return linear_score(lp->members[class_index], x);
    }
    return (*proba_row(m, x))[class_index];
}

/// Mean model output over the background with coalition features taken from x.
inline double coalition_value(const FittedModel& m, const double* x, const Matrix& background,
                              std::uint64_t mask, std::size_t class_index,
                              std::vector<double>& buf) {
    const std::size_t p = background.cols;
    double acc = 0.0;
    for (std::size_t b = 0; b < background.rows; ++b) {
        const double* bg = background.row_ptr(b);
        for (std::size_t j = 0; j < p; ++j)
            buf[j] = (mask >> j) & 1u ? x[j] : bg[j];
        acc += shap_model_output(m, buf.data(), class_index);
    }
    return acc / static_cast<double>(background.rows);
}

inline void shap_check_inputs(const FittedModel& m, const Matrix& background) {
    if (background.rows == 0) throw ModelError("attribution background must be non-empty");
    if (background.cols != m.n_features())
        throw ModelError("background width does not match the model's feature count");
}

}  // namespace detail

/// Exact Shapley values by full coalition enumeration.
///   phi_i = sum over S not containing i of |S|!(p-|S|-1)!/p! (v(S+i) - v(S))
inline Attribution shapley_exact(const FittedModel& m, const double* x, const Matrix& background,
                                 std::size_t class_index = 0) {
    detail::shap_check_inputs(m, background);
    const std::size_t p = m.n_features();
    if (p > 12)
        throw ModelError("exact Shapley enumeration is limited to 12 features; "
                         "use kernel mode for wider inputs");

    const std::uint64_t n_masks = 1ull << p;
    std::vector<double> v(n_masks);
    std::vector<double> buf(p);
    for (std::uint64_t mask = 0; mask < n_masks; ++mask)
        v[mask] = detail::coalition_value(m, x, background, mask, class_index, buf);

    std::vector<double> fact(p + 1, 1.0);  // exact in double through 12!
    for (std::size_t i = 1; i <= p; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    Attribution a;
    a.base_value = v[0];
    a.explained_output = v[n_masks - 1];
    a.phi.assign(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        const std::uint64_t bit = 1ull << i;
        for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double w = fact[s] * fact[p - s - 1] / fact[p];
            a.phi[i] += w * (v[mask | bit] - v[mask]);
        }
    }
    return a;
}

/// Shapley kernel weight pi(z) = (p-1) / (C(p,|z|) * |z| * (p-|z|)).
inline double shapley_kernel_weight(std::size_t p, std::size_t z) {
    if (z == 0 || z >= p) throw ModelError("kernel weight is defined for 0 < |z| < p");
    double binom = 1.0;
    for (std::size_t i = 0; i < z; ++i)
        binom = binom * static_cast<double>(p - i) / static_cast<double>(i + 1);
    return static_cast<double>(p - 1) /
           (binom * static_cast<double>(z) * static_cast<double>(p - z));
}

/// Kernel approximation: weighted least squares over coalitions.  When
/// 2^p <= n_coalitions every proper coalition is enumerated and the result
/// reproduces the exact values; otherwise coalitions are sampled with the
/// given seed.  Local accuracy is enforced via the two equality constraints.
inline Attribution shapley_kernel(const FittedModel& m, const double* x, const Matrix& background,
                                  std::size_t n_coalitions, std::uint64_t seed,
                                  std::size_t class_index = 0) {
    detail::shap_check_inputs(m, background);
    const std::size_t p = m.n_features();
    std::vector<double> buf(p);
    const std::uint64_t full = p >= 64 ? ~0ull : (1ull << p) - 1;

    Attribution a;
    a.base_value = detail::coalition_value(m, x, background, 0, class_index, buf);
    a.explained_output = detail::coalition_value(m, x, background, full, class_index, buf);
    const double total = a.explained_output - a.base_value;
    if (p == 1) {  // single player: the constraints pin everything
        a.phi = {total};
        return a;
    }

    std::vector<std::uint64_t> masks;
    const bool enumerate = p < 63 && (1ull << p) <= n_coalitions;
    if (enumerate) {
        for (std::uint64_t mask = 1; mask < full; ++mask) masks.push_back(mask);
    } else {
        if (n_coalitions == 0) throw ModelError("n_coalitions must be positive");
        Rng rng(seed);
        masks.reserve(n_coalitions);
        while (masks.size() < n_coalitions) {
            std::uint64_t mask = 0;
            for (std::size_t j = 0; j < p; ++j)
                if (rng.uniform01() < 0.5) mask |= 1ull << j;
            if (mask == 0 || mask == full) continue;  // handled as constraints
            masks.push_back(mask);
        }
    }

    // Substitute phi_0 = base and phi_{p-1} = total - sum(others); solve the
    // remaining (p-1)-dimensional weighted normal equations.
    const std::size_t q = p - 1;
    Matrix ata(q, q, 0.0);
    std::vector<double> atd(q, 0.0);
    std::vector<double> arow(q);
    for (const std::uint64_t mask : masks) {
        const auto z = static_cast<std::size_t>(std::popcount(mask));
        const double w = shapley_kernel_weight(p, z);
        const double last = (mask >> q) & 1u ? 1.0 : 0.0;
        for (std::size_t j = 0; j < q; ++j)
            arow[j] = ((mask >> j) & 1u ? 1.0 : 0.0) - last;
        const double d =
            detail::coalition_value(m, x, background, mask, class_index, buf) -
            a.base_value - last * total;
        for (std::size_t r = 0; r < q; ++r) {
            if (arow[r] == 0.0) continue;
            const double wr = w * arow[r];
            for (std::size_t c = 0; c < q; ++c) ata(r, c) += wr * arow[c];
            atd[r] += wr * d;
        }
    }
    const std::vector<double> head = solve_linear_system(ata, atd);

    a.phi.assign(p, 0.0);
    double sum_head = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        a.phi[j] = head[j];
        sum_head += head[j];
    }
    a.phi[q] = total - sum_head;
    return a;
}

/// Mode dispatch: exact when p <= 12, else kernel with 2048 sampled coalitions.
inline Attribution shapley_auto(const FittedModel& m, const double* x, const Matrix& background,
                                std::uint64_t seed, std::size_t class_index = 0) {
    if (m.n_features() <= 12) return shapley_exact(m, x, background, class_index);
    return shapley_kernel(m, x, background, 2048, seed, class_index);
}

}  // namespace riskpipe

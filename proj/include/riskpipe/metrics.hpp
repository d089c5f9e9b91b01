#pragma once

// Evaluation metrics: confusion-matrix family for classification, error
// metrics for regression, and external/internal cluster agreement indices.
// Degenerate ratios (zero denominators) report 0 and are listed by name so
// callers can flag them instead of silently trusting the value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskpipe/json_util.hpp"
#include "riskpipe/matrix.hpp"

namespace riskpipe {

class MetricError : public std::runtime_error {
  public:
    explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

struct MetricReport {
    Json values = Json::object();        // ordered metric name -> number
    std::vector<std::string> degenerate; // metrics set to 0 by convention
};

namespace detail {

inline double ratio(double num, double den, const std::string& name, MetricReport& rep) {
    if (den == 0.0) {
        rep.degenerate.push_back(name);
        return 0.0;
    }
    return num / den;
}

inline double binom2(double x) { return x * (x - 1.0) / 2.0; }

inline double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
}

}  // namespace detail

/// Classification metrics.  `classes` lists the distinct class values in
/// ascending order; for binary problems the positive class is classes[1].
/// `proba` (optional) is an n x |classes| matrix of class probabilities
/// aligned with `classes`; when given, cross-entropy is included.
inline MetricReport classification_metrics(const std::vector<double>& y_true,
                                           const std::vector<double>& y_pred,
                                           const std::vector<double>& classes,
                                           const Matrix* proba = nullptr) {
    if (y_true.size() != y_pred.size()) throw MetricError("prediction/label size mismatch");
    if (y_true.empty()) throw MetricError("cannot score an empty set");
    if (classes.size() < 2) throw MetricError("need at least two classes");
    const std::size_t k = classes.size();
    std::map<double, std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) idx[classes[i]] = i;

    // Confusion counts C[true][pred].
    std::vector<std::vector<double>> C(k, std::vector<double>(k, 0.0));
    const double n = static_cast<double>(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto it = idx.find(y_true[i]);
        const auto ip = idx.find(y_pred[i]);
        if (it == idx.end() || ip == idx.end())
            throw MetricError("label value not among the known classes");
        C[it->second][ip->second] += 1.0;
    }
    std::vector<double> row(k, 0.0), col(k, 0.0);
    double diag = 0.0;
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t p = 0; p < k; ++p) {
            row[t] += C[t][p];
            col[p] += C[t][p];
            if (t == p) diag += C[t][p];
        }

    MetricReport rep;
    rep.values["accuracy"] = diag / n;

    if (k == 2) {
        const double tp = C[1][1], fn = C[1][0], fp = C[0][1], tn = C[0][0];
        const double precision = detail::ratio(tp, tp + fp, "precision", rep);
        const double recall = detail::ratio(tp, tp + fn, "recall", rep);
        rep.values["precision"] = precision;
        rep.values["recall"] = recall;
        rep.values["f1"] =
            detail::ratio(2.0 * precision * recall, precision + recall, "f1", rep);
        rep.values["false_alarm_ratio"] = detail::ratio(fp, tp + fp, "false_alarm_ratio", rep);
        rep.values["probability_of_detection"] =
            detail::ratio(tp, tp + fn, "probability_of_detection", rep);
        // TSS = POD - false positive rate.
        const double pod = detail::ratio(tp, tp + fn, "tss", rep);
        const double pofd = detail::ratio(fp, fp + tn, "tss", rep);
        rep.values["tss"] = pod - pofd;
    } else {
        // Macro-averaged one-vs-rest precision/recall/F1.
        double sp = 0.0, sr = 0.0, sf = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double tp = C[c][c];
            const double p = detail::ratio(tp, col[c], "precision", rep);
            const double r = detail::ratio(tp, row[c], "recall", rep);
            sp += p;
            sr += r;
            sf += detail::ratio(2.0 * p * r, p + r, "f1", rep);
        }
        rep.values["precision"] = sp / static_cast<double>(k);
        rep.values["recall"] = sr / static_cast<double>(k);
        rep.values["f1"] = sf / static_cast<double>(k);
    }

    // HSS = Cohen's kappa (binary and multiclass alike).
    double pe = 0.0;
    for (std::size_t c = 0; c < k; ++c) pe += row[c] * col[c];
    pe /= n * n;
    rep.values["hss"] = detail::ratio(diag / n - pe, 1.0 - pe, "hss", rep);

    // MCC, multiclass generalization.
    double srow2 = 0.0, scol2 = 0.0, cross = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        srow2 += row[c] * row[c];
        scol2 += col[c] * col[c];
        cross += row[c] * col[c];
    }
    const double mcc_den = std::sqrt((n * n - srow2) * (n * n - scol2));
    rep.values["mcc"] = detail::ratio(n * diag - cross, mcc_den, "mcc", rep);

    if (proba != nullptr) {
        if (proba->rows != y_true.size() || proba->cols != k)
            throw MetricError("probability matrix shape mismatch");
        double ce = 0.0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            double p = (*proba)(i, idx.at(y_true[i]));
            p = std::clamp(p, 1e-15, 1.0 - 1e-15);
            ce -= std::log(p);
        }
        rep.values["cross_entropy"] = ce / n;
    }
    // Reorder degenerate list to unique names, keeping first-mention order.
    std::vector<std::string> uniq;
    for (const std::string& s : rep.degenerate)
        if (std::find(uniq.begin(), uniq.end(), s) == uniq.end()) uniq.push_back(s);
    rep.degenerate = std::move(uniq);
    return rep;
}

inline MetricReport regression_metrics(const std::vector<double>& y_true,
                                       const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) throw MetricError("prediction/label size mismatch");
    if (y_true.empty()) throw MetricError("cannot score an empty set");
    const double n = static_cast<double>(y_true.size());
    double se = 0.0, ae = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_true[i] - y_pred[i];
        se += d * d;
        ae += std::abs(d);
        mean += y_true[i];
    }
    mean /= n;
    double sst = 0.0;
    for (double y : y_true) sst += (y - mean) * (y - mean);

    MetricReport rep;
    const double mse = se / n;
    rep.values["mse"] = mse;
    rep.values["rmse"] = std::sqrt(mse);
    rep.values["mae"] = ae / n;
    rep.values["r2"] = detail::ratio(sst - se, sst, "r2", rep);
    return rep;
}

namespace detail {

struct Contingency {
    std::vector<std::vector<double>> cell;  // [true cluster][pred cluster]
    std::vector<double> a;                  // true cluster sizes
    std::vector<double> b;                  // pred cluster sizes
    double n = 0.0;
};

inline Contingency contingency_table(const std::vector<int>& t, const std::vector<int>& p) {
    std::map<int, std::size_t> ti, pi;
    for (int v : t) ti.emplace(v, ti.size());
    for (int v : p) pi.emplace(v, pi.size());
    Contingency c;
    c.cell.assign(ti.size(), std::vector<double>(pi.size(), 0.0));
    c.a.assign(ti.size(), 0.0);
    c.b.assign(pi.size(), 0.0);
    c.n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t r = ti[t[i]], q = pi[p[i]];
        c.cell[r][q] += 1.0;
        c.a[r] += 1.0;
        c.b[q] += 1.0;
    }
    return c;
}

/// True when the two labelings induce the same partition of indices.
inline bool same_partition(const Contingency& c) {
    for (const auto& r : c.cell) {
        std::size_t nz = 0;
        for (double v : r)
            if (v > 0.0) ++nz;
        if (nz != 1) return false;
    }
    for (std::size_t q = 0; q < c.b.size(); ++q) {
        std::size_t nz = 0;
        for (const auto& r : c.cell)
            if (r[q] > 0.0) ++nz;
        if (nz != 1) return false;
    }
    return true;
}

/// Expected mutual information under the hypergeometric model.
inline double expected_mutual_information(const Contingency& c) {
    const double n = c.n;
    double emi = 0.0;
    for (double ai : c.a) {
        for (double bj : c.b) {
            const double lo = std::max(1.0, ai + bj - n);
            const double hi = std::min(ai, bj);
            for (double nij = lo; nij <= hi; nij += 1.0) {
                const double t1 = (nij / n) * std::log(n * nij / (ai * bj));
                const double lt2 = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) +
                                   std::lgamma(n - ai + 1.0) + std::lgamma(n - bj + 1.0) -
                                   std::lgamma(n + 1.0) - std::lgamma(nij + 1.0) -
                                   std::lgamma(ai - nij + 1.0) - std::lgamma(bj - nij + 1.0) -
                                   std::lgamma(n - ai - bj + nij + 1.0);
                emi += t1 * std::exp(lt2);
            }
        }
    }
    return emi;
}

}  // namespace detail

/// External cluster agreement: ARI, AMI (arithmetic normalization) and the
/// V-measure, in that key order.  Labels are arbitrary integers.
inline MetricReport clustering_external_metrics(const std::vector<int>& labels_true,
                                                const std::vector<int>& labels_pred) {
    if (labels_true.size() != labels_pred.size())
        throw MetricError("prediction/label size mismatch");
    if (labels_true.empty()) throw MetricError("cannot score an empty set");
    const detail::Contingency c = detail::contingency_table(labels_true, labels_pred);
    const double n = c.n;
    MetricReport rep;

    // Conditional entropies for the V-measure (zero-entropy side scores 1).
    const double hu = detail::entropy(c.a, n);
    const double hv = detail::entropy(c.b, n);
    double hu_given_v = 0.0, hv_given_u = 0.0;
    for (std::size_t r = 0; r < c.a.size(); ++r)
        for (std::size_t q = 0; q < c.b.size(); ++q) {
            const double nij = c.cell[r][q];
            if (nij == 0.0) continue;
            hu_given_v -= (nij / n) * std::log(nij / c.b[q]);
            hv_given_u -= (nij / n) * std::log(nij / c.a[r]);
        }
    const double homogeneity = hu == 0.0 ? 1.0 : 1.0 - hu_given_v / hu;
    const double completeness = hv == 0.0 ? 1.0 : 1.0 - hv_given_u / hv;
    const double v = homogeneity + completeness == 0.0
                         ? 0.0
                         : 2.0 * homogeneity * completeness / (homogeneity + completeness);

    if (detail::same_partition(c)) {
        rep.values["ARI"] = 1.0;
        rep.values["AMI"] = 1.0;
        rep.values["v-score"] = 1.0;
        return rep;
    }
    if (c.a.size() < 2 || c.b.size() < 2) {
        // One side constant (and partitions differ): chance-corrected indices
        // are undefined; report 0 by convention, V from its components.
        rep.values["ARI"] = 0.0;
        rep.values["AMI"] = 0.0;
        rep.values["v-score"] = v;
        rep.degenerate = {"ARI", "AMI"};
        return rep;
    }

    // Adjusted Rand index.
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& r : c.cell)
        for (double x : r) sum_ij += detail::binom2(x);
    for (double x : c.a) sum_a += detail::binom2(x);
    for (double x : c.b) sum_b += detail::binom2(x);
    const double expected = sum_a * sum_b / detail::binom2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    rep.values["ARI"] = detail::ratio(sum_ij - expected, max_index - expected, "ARI", rep);

    // Adjusted mutual information.
    double mi = 0.0;
    for (std::size_t r = 0; r < c.a.size(); ++r)
        for (std::size_t q = 0; q < c.b.size(); ++q) {
            const double nij = c.cell[r][q];
            if (nij == 0.0) continue;
            mi += (nij / n) * std::log(n * nij / (c.a[r] * c.b[q]));
        }
    const double emi = detail::expected_mutual_information(c);
    const double denom = 0.5 * (hu + hv) - emi;
    if (std::abs(denom) < 1e-15) {
        rep.values["AMI"] = 0.0;
        rep.degenerate.push_back("AMI");
    } else {
        rep.values["AMI"] = (mi - emi) / denom;
    }
    rep.values["v-score"] = v;
    return rep;
}

/// Mean silhouette coefficient over non-noise points (label -1 = noise).
/// Singleton clusters score 0.  Throws when fewer than two clusters remain.
inline double silhouette_score(const Matrix& X, const std::vector<int>& labels) {
    if (X.rows != labels.size()) throw MetricError("row/label count mismatch");
    std::vector<std::size_t> keep;
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        keep.push_back(i);
        clusters[labels[i]].push_back(i);
    }
    if (clusters.size() < 2)
        throw MetricError("silhouette undefined: fewer than two clusters");

    double total = 0.0;
    for (std::size_t i : keep) {
        const std::vector<std::size_t>& own = clusters.at(labels[i]);
        if (own.size() == 1) continue;  // singleton scores 0
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i) a += euclidean_distance(X.row_ptr(i), X.row_ptr(j), X.cols);
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [lab, members] : clusters) {
            if (lab == labels[i]) continue;
            double d = 0.0;
            for (std::size_t j : members) d += euclidean_distance(X.row_ptr(i), X.row_ptr(j), X.cols);
            b = std::min(b, d / static_cast<double>(members.size()));
        }
        const double m = std::max(a, b);
        total += m == 0.0 ? 0.0 : (b - a) / m;
    }
    return total / static_cast<double>(keep.size());
}

}  // namespace riskpipe

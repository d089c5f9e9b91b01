#pragma once

// Model selection: seeded k-fold splitting, recursive feature elimination,
// and grid-search cross-validation.  Grid search is the outer loop; RFE runs
// inside each fold's fit, and SMOTE (when enabled) touches only the training
// part of each fold so no synthetic sample reaches a validation row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskpipe/config.hpp"
#include "riskpipe/log.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/model.hpp"
#include "riskpipe/rng.hpp"
#include "riskpipe/smote.hpp"

namespace riskpipe {

/// Seeded shuffle, then contiguous chunks; the first n % k folds take the
/// extra row.  Returns k disjoint validation index sets covering all rows.
inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                         std::uint64_t seed) {
    if (k == 0) throw ModelError("fold count must be positive");
    if (k > n)
        throw ModelError("cannot split " + std::to_string(n) + " rows into " +
                         std::to_string(k) + " folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return folds;
}

// ---- recursive feature elimination ---------------------------------------------

struct RfeIterationTrace {
    std::vector<std::size_t> features;  // surviving original indices, ascending
    std::vector<double> importances;    // parallel to `features`
    std::size_t eliminated = 0;         // original index removed after this fit
};

struct RfeResult {
    // Per original feature: retained features rank 1; the last feature
    // eliminated ranks 2, the first eliminated ranks highest.
    std::vector<int> ranking;
    std::vector<std::size_t> retained;  // original indices, ascending
    std::vector<std::string> retained_names;
    std::vector<RfeIterationTrace> trace;  // one entry per elimination
};

/// Recursive feature elimination.  Fits on the surviving columns, drops the
/// minimum-importance feature (ties: highest original index goes first), and
/// repeats until n_select remain.  The final model, fit on exactly the
/// retained columns, is written to *out_model when given.
inline RfeResult rfe_run(const ModelSpec& spec, const Matrix& X, const std::vector<double>& y,
                         const std::vector<std::string>& feature_names, std::size_t n_select,
                         FittedModel* out_model = nullptr) {
    if (!family_has_feature_weights(spec.family))
        throw ModelError(to_string(spec.family) +
                         " does not expose feature weights; recursive feature elimination "
                         "requires a feature-weighting learner");
    const std::size_t p = X.cols;
    if (n_select == 0 || n_select > p)
        throw ModelError("n_features_to_select must lie in [1, " + std::to_string(p) + "]");

    RfeResult result;
    std::vector<std::size_t> surviving(p);
    std::iota(surviving.begin(), surviving.end(), std::size_t{0});
    std::vector<std::size_t> elim_order;

    while (surviving.size() > n_select) {
        const Matrix Xs = select_cols(X, surviving);
        const std::vector<std::string> names = select_idx(feature_names, surviving);
        const FittedModel m = fit_model(spec, Xs, &y, names);
        const std::optional<std::vector<double>> w = feature_weights_model(m);
        if (!w) throw ModelError("fitted model produced no feature weights");

        // argmin; on ties the highest original index falls first.  `surviving`
        // is ascending, so scanning forward with <= keeps the last tied entry.
        std::size_t drop = 0;
        double drop_w = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < w->size(); ++j)
            if ((*w)[j] <= drop_w) {
                drop_w = (*w)[j];
                drop = j;
            }

        result.trace.push_back({surviving, *w, surviving[drop]});
        elim_order.push_back(surviving[drop]);
        surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(drop));
    }

    result.ranking.assign(p, 1);
    const std::size_t total = elim_order.size();
    for (std::size_t e = 0; e < total; ++e)
        result.ranking[elim_order[e]] = static_cast<int>(total - e + 1);
    result.retained = surviving;
    result.retained_names = select_idx(feature_names, surviving);

    if (out_model) {
        const Matrix Xr = select_cols(X, surviving);
        *out_model = fit_model(spec, Xr, &y, result.retained_names);
    }
    return result;
}

// ---- one fit under a resampling/elimination plan --------------------------------

struct FitPlan {
    ModelSpec spec;
    bool smote = false;
    int smote_k = 5;
    bool rfe = false;
    std::size_t rfe_select = 1;
};

struct FitOutcome {
    FittedModel model;
    std::vector<std::size_t> used_columns;  // original indices the model consumes
    std::optional<RfeResult> rfe;
};

inline FitOutcome fit_with_plan(const FitPlan& plan, const Matrix& X,
                                const std::vector<double>& y,
                                const std::vector<std::string>& feature_names,
                                std::uint64_t smote_seed, Logger* log = nullptr) {
    const Matrix* Xp = &X;
    const std::vector<double>* yp = &y;
    SmoteResult resampled;
    if (plan.smote) {
        resampled = smote_balance(X, y, static_cast<std::size_t>(plan.smote_k), smote_seed, log);
        Xp = &resampled.features;
        yp = &resampled.target;
    }
    FitOutcome out;
    if (plan.rfe) {
        out.rfe = rfe_run(plan.spec, *Xp, *yp, feature_names, plan.rfe_select, &out.model);
        out.used_columns = out.rfe->retained;
    } else {
        out.model = fit_model(plan.spec, *Xp, yp, feature_names);
        out.used_columns.resize(X.cols);
        std::iota(out.used_columns.begin(), out.used_columns.end(), std::size_t{0});
    }
    return out;
}

// ---- grid-search cross-validation -------------------------------------------------

struct GridPointReport {
    std::vector<std::pair<std::string, ParamValue>> params;  // axis choices only
    std::vector<double> fold_scores;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct CvReport {
    std::string scoring;
    std::vector<GridPointReport> points;
    std::size_t best_index = 0;
};

struct GridSearchSeeds {
    std::uint64_t cv = 0;           // drives fold shuffle and per-(point, fold) fits
    std::uint64_t refit_model = 0;  // final fit on all training rows
    std::uint64_t refit_smote = 0;  // resampling for that final fit
};

struct GridSearchOutcome {
    CvReport report;
    FittedModel model;  // best point refit on all training rows
    std::vector<std::size_t> used_columns;
    std::optional<RfeResult> rfe;  // recomputed on full training data when enabled
};

namespace detail {

/// Validation-fold score; larger is better (errors enter negated).
inline double cv_score(const std::string& scoring, const std::vector<double>& y_true,
                       const std::vector<double>& y_pred, const std::vector<double>& classes) {
    const std::size_t n = y_true.size();
    if (scoring == "accuracy") {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (y_true[i] == y_pred[i]) ++hits;
        return static_cast<double>(hits) / static_cast<double>(n);
    }
    if (scoring == "f1") {
        const double positive = classes.back();
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool t = y_true[i] == positive, p = y_pred[i] == positive;
            if (t && p) ++tp;
            if (!t && p) ++fp;
            if (t && !p) ++fn;
        }
        const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
        const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
        return prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
    }
    if (scoring == "neg_mse") {
        double se = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = y_true[i] - y_pred[i];
            se += d * d;
        }
        return -se / static_cast<double>(n);
    }
    throw ModelError("unknown scoring '" + scoring + "'");
}

}  // namespace detail

/// Exhaustive grid search.  Axes are parameter entries declared with multiple
/// values; the first declared axis is the most significant odometer digit and
/// ties on mean score keep the first point enumerated.
inline GridSearchOutcome grid_search(ModelFamily family, Task task, const ParamList& params,
                                     const Matrix& X, const std::vector<double>& y,
                                     const std::vector<std::string>& feature_names,
                                     std::size_t k_folds, std::string scoring,
                                     const GridSearchSeeds& seeds, const SmoteSettings& smote,
                                     const RfeConfig& rfe_cfg, Logger* log = nullptr) {
    if (task == Task::clustering)
        throw ModelError("grid search requires a supervised task (no cross-validation target)");
    if (X.rows != y.size()) throw ModelError("row/target count mismatch");

    std::vector<double> classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    if (scoring.empty())
        scoring = task == Task::regression ? "neg_mse"
                  : classes.size() == 2    ? "f1"
                                           : "accuracy";
    if (scoring != "accuracy" && scoring != "f1" && scoring != "neg_mse")
        throw ModelError("unknown scoring '" + scoring + "'");
    if (scoring == "f1" && (task != Task::classification || classes.size() != 2))
        throw ModelError("scoring 'f1' requires a binary classification target");
    if (scoring == "neg_mse" && task != Task::regression)
        throw ModelError("scoring 'neg_mse' requires a regression target");

    // Axis enumeration (declaration order; empty grid = one default point).
    std::vector<std::size_t> axis_pos;
    std::size_t n_points = 1;
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i].second.is_grid_axis) {
            axis_pos.push_back(i);
            n_points *= params[i].second.values.size();
        }

    const std::vector<std::vector<std::size_t>> folds =
        kfold_split(X.rows, k_folds, derive_seed(seeds.cv, 0));

    GridSearchOutcome out;
    out.report.scoring = scoring;
    double best_mean = -std::numeric_limits<double>::infinity();

    for (std::size_t g = 0; g < n_points; ++g) {
        // Odometer digits, first axis most significant.
        std::vector<std::size_t> digit(axis_pos.size(), 0);
        std::size_t rem = g;
        for (std::size_t a = axis_pos.size(); a-- > 0;) {
            const std::size_t size = params[axis_pos[a]].second.values.size();
            digit[a] = rem % size;
            rem /= size;
        }
        std::vector<std::pair<std::string, ParamValue>> assignment;  // full, for resolve
        GridPointReport point;
        for (std::size_t i = 0, a = 0; i < params.size(); ++i) {
            if (params[i].second.is_grid_axis) {
                const ParamValue& v = params[i].second.values[digit[a++]];
                assignment.emplace_back(params[i].first, v);
                point.params.emplace_back(params[i].first, v);
            } else {
                assignment.emplace_back(params[i].first, params[i].second.values.front());
            }
        }
        const ModelSpec base_spec = resolve_spec(family, task, assignment, 0);

        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<char> in_val(X.rows, 0);
            for (std::size_t r : folds[f]) in_val[r] = 1;
            std::vector<std::size_t> train_idx;
            train_idx.reserve(X.rows - folds[f].size());
            for (std::size_t r = 0; r < X.rows; ++r)
                if (!in_val[r]) train_idx.push_back(r);

            FitPlan plan;
            plan.spec = base_spec;
            plan.spec.seed = derive_seed(seeds.cv, g + 1, 2 * (f + 1));
            plan.smote = smote.enabled;
            plan.smote_k = smote.k_neighbors;
            plan.rfe = rfe_cfg.enabled;
            plan.rfe_select = static_cast<std::size_t>(rfe_cfg.n_features_to_select);

            const Matrix Xtr = select_rows(X, train_idx);
            const std::vector<double> ytr = select_idx(y, train_idx);
            const FitOutcome fit = fit_with_plan(plan, Xtr, ytr, feature_names,
                                                 derive_seed(seeds.cv, g + 1, 2 * (f + 1) + 1),
                                                 log);

            const Matrix Xval = select_cols(select_rows(X, folds[f]), fit.used_columns);
            const std::vector<double> yval = select_idx(y, folds[f]);
            const std::vector<double> pred = predict_model(fit.model, Xval);
            point.fold_scores.push_back(detail::cv_score(scoring, yval, pred, classes));
        }

        double mean = 0.0;
        for (double s : point.fold_scores) mean += s;
        mean /= static_cast<double>(point.fold_scores.size());
        double var = 0.0;
        for (double s : point.fold_scores) var += (s - mean) * (s - mean);
        point.mean = mean;
        point.stddev = std::sqrt(var / static_cast<double>(point.fold_scores.size()));
        if (mean > best_mean) {  // strict: ties keep the first point enumerated
            best_mean = mean;
            out.report.best_index = g;
        }
        out.report.points.push_back(std::move(point));
        if (log)
            log->debug("model_select",
                       "grid point " + std::to_string(g) + " mean " + format_g17(mean));
    }

    // Refit the winning point on all training rows (RFE recomputed in full).
    std::vector<std::pair<std::string, ParamValue>> best_assignment;
    {
        const GridPointReport& best = out.report.points[out.report.best_index];
        std::size_t a = 0;
        for (const auto& [name, entry] : params) {
            if (entry.is_grid_axis)
                best_assignment.emplace_back(name, best.params[a++].second);
            else
                best_assignment.emplace_back(name, entry.values.front());
        }
    }
    FitPlan refit;
    refit.spec = resolve_spec(family, task, best_assignment, 0);
    refit.spec.seed = seeds.refit_model;
    refit.smote = smote.enabled;
    refit.smote_k = smote.k_neighbors;
    refit.rfe = rfe_cfg.enabled;
    refit.rfe_select = static_cast<std::size_t>(rfe_cfg.n_features_to_select);
    FitOutcome final_fit =
        fit_with_plan(refit, X, y, feature_names, seeds.refit_smote, log);
    out.model = std::move(final_fit.model);
    out.used_columns = std::move(final_fit.used_columns);
    out.rfe = std::move(final_fit.rfe);
    return out;
}

// ---- serialization ------------------------------------------------------------------

inline Json to_json(const RfeResult& r) {
    Json j;
    j["ranking"] = r.ranking;
    j["retained"] = r.retained_names;
    Json trace = Json::array();
    for (const RfeIterationTrace& it : r.trace) {
        Json entry;
        entry["features"] = it.features;
        entry["importances"] = detail::doubles_to_json(it.importances);
        entry["eliminated"] = it.eliminated;
        trace.push_back(std::move(entry));
    }
    j["importance_trace"] = std::move(trace);
    return j;
}

inline Json to_json(const CvReport& r) {
    Json j;
    j["scoring"] = r.scoring;
    Json points = Json::array();
    for (const GridPointReport& p : r.points) {
        Json entry;
        Json params = Json::object();
        for (const auto& [name, value] : p.params)
            params[name] = detail::param_value_to_json(value);
        entry["params"] = std::move(params);
        entry["fold_scores"] = detail::doubles_to_json(p.fold_scores);
        entry["mean_score"] = format_g17(p.mean);
        entry["std_score"] = format_g17(p.stddev);
        points.push_back(std::move(entry));
    }
    j["grid_points"] = std::move(points);
    Json best = Json::object();
    for (const auto& [name, value] : r.points[r.best_index].params)
        best[name] = detail::param_value_to_json(value);
    j["best_params"] = std::move(best);
    return j;
}

}  // namespace riskpipe

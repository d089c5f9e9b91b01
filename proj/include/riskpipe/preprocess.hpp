#pragma once

// Fitted preprocessing: missing-column drop, imputation, standardization,
// min-max scaling, one-hot encoding and the optional regression label
// transform.  Everything is fit on train rows only and stored in a
// serializable PreprocessState so apply_preprocess is a pure function of
// (state, data).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "riskpipe/config.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/json_util.hpp"
#include "riskpipe/log.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct NumericImputeEntry {
    NumericImpute mode = NumericImpute::mean;
    double value = 0.0;  // mean / median replacement value
    // regression mode only: x = intercept + coef . predictors
    std::vector<std::string> predictors;
    std::vector<double> predictor_means;
    std::vector<double> coef;
    double intercept = 0.0;
};

struct CategoricalImputeEntry {
    CategoricalImpute mode = CategoricalImpute::most_frequent;
    std::size_t mode_index = 0;
    std::vector<double> cumulative;  // random mode: cumulative train distribution
};

struct LabelTransform {
    bool standardize = true;  // false => min-max
    double a = 0.0;           // mean / min
    double b = 1.0;           // std / max
};

struct PreprocessState {
    Task task = Task::classification;
    std::uint64_t seed = 0;
    std::vector<std::string> dropped_columns;
    std::map<std::string, NumericImputeEntry> numeric_impute;
    std::map<std::string, CategoricalImputeEntry> categorical_impute;
    // Fallbacks cover columns that had no missing train cells but meet
    // missing values at predict time; every surviving feature column has one.
    std::map<std::string, double> numeric_fallback_mean;
    std::map<std::string, std::size_t> categorical_fallback_mode;
    std::map<std::string, std::pair<double, double>> feature_standardize;  // mean, std
    std::map<std::string, std::pair<double, double>> feature_minmax;       // min, max
    std::optional<LabelTransform> label_transform;
};

struct EncodedDataset {
    Matrix features;                         // one row per dataset row
    std::vector<std::string> feature_names;  // numeric name or "col=category"
    // Raw label columns (category index or numeric value; NaN when missing).
    std::vector<std::string> label_names;
    std::map<std::string, std::vector<double>> labels;
    // Supervised target: class value (classification) or transformed value
    // (regression); NaN when the label cell is missing.
    std::vector<double> target;
};

namespace detail {

inline double observed_mean(const std::vector<double>& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v)
        if (!cell_missing(x)) {
            s += x;
            ++n;
        }
    return n == 0 ? 0.0 : s / static_cast<double>(n);
}

inline double observed_median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return cell_missing(x); }),
            v.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());  // population variance
    double sd = std::sqrt(var);
    if (sd == 0.0) return {0.0, 1.0};  // constant column -> identity transform
    return {mean, sd};
}

inline std::pair<double, double> min_max(const std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (lo == hi) return {0.0, 1.0};  // constant column -> identity transform
    return {lo, hi};
}

}  // namespace detail

/// Fit the full preprocessing state on the train rows of `ds`.
/// `seed` drives random categorical imputation draws.
inline PreprocessState fit_preprocess(const TabularDataset& ds, const AlgoConfig& ac,
                                      std::uint64_t seed, Logger* log = nullptr) {
    if (ds.train_rows.empty()) throw DataError("cannot fit preprocessing: no train rows");
    const double n_train = static_cast<double>(ds.train_rows.size());

    PreprocessState st;
    st.task = ac.task;
    st.seed = seed;

    // Pass 1: drop feature columns whose train missing fraction exceeds the
    // threshold.
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        if (ds.schemas[c].role != ColumnRole::feature) continue;
        std::size_t miss = 0;
        for (std::size_t r : ds.train_rows)
            if (cell_missing(ds.cells(r, c))) ++miss;
        const double frac = static_cast<double>(miss) / n_train;
        if (frac > ac.imputation.perc_nan_to_drop) {
            st.dropped_columns.push_back(ds.schemas[c].name);
            if (log)
                log->info("preprocess", "dropping column '" + ds.schemas[c].name +
                                            "': missing fraction " + std::to_string(frac));
        } else {
            feature_cols.push_back(c);
        }
    }
    if (feature_cols.empty())
        throw DataError("all feature columns were dropped by the missing-value threshold");

    // Pass 2: imputation entries and fallbacks.
    for (std::size_t c : feature_cols) {
        const ColumnSchema& sch = ds.schemas[c];
        std::vector<double> train_col;
        train_col.reserve(ds.train_rows.size());
        std::size_t miss = 0;
        for (std::size_t r : ds.train_rows) {
            train_col.push_back(ds.cells(r, c));
            if (cell_missing(train_col.back())) ++miss;
        }
        const bool has_missing = miss > 0;
        if (miss == train_col.size())
            throw DataError("column '" + sch.name + "' has no observed train values");

        if (sch.kind == ColumnKind::numeric) {
            st.numeric_fallback_mean[sch.name] = detail::observed_mean(train_col);
            if (!has_missing) continue;
            NumericImputeEntry e;
            e.mode = ac.imputation.not_categorical;
            if (e.mode == NumericImpute::mean) {
                e.value = detail::observed_mean(train_col);
            } else if (e.mode == NumericImpute::median) {
                e.value = detail::observed_median(train_col);
            } else {
                // Regression imputation: OLS of this column on every other
                // surviving numeric feature column, predictors mean-imputed.
                std::vector<std::size_t> pred_cols;
                for (std::size_t p : feature_cols)
                    if (p != c && ds.schemas[p].kind == ColumnKind::numeric)
                        pred_cols.push_back(p);
                bool ok = !pred_cols.empty();
                if (ok) {
                    for (std::size_t p : pred_cols) {
                        std::vector<double> pc;
                        for (std::size_t r : ds.train_rows) pc.push_back(ds.cells(r, p));
                        e.predictors.push_back(ds.schemas[p].name);
                        e.predictor_means.push_back(detail::observed_mean(pc));
                    }
                    // Rows where the target is observed.
                    std::vector<std::size_t> fit_rows;
                    for (std::size_t r : ds.train_rows)
                        if (!cell_missing(ds.cells(r, c))) fit_rows.push_back(r);
                    const std::size_t k = pred_cols.size();
                    // Normal equations over [predictors, 1].
                    Matrix ata(k + 1, k + 1);
                    std::vector<double> atb(k + 1, 0.0);
                    for (std::size_t r : fit_rows) {
                        std::vector<double> x(k + 1, 1.0);
                        for (std::size_t j = 0; j < k; ++j) {
                            double v = ds.cells(r, pred_cols[j]);
                            x[j] = cell_missing(v) ? e.predictor_means[j] : v;
                        }
                        const double y = ds.cells(r, c);
                        for (std::size_t a = 0; a <= k; ++a) {
                            for (std::size_t b = 0; b <= k; ++b) ata(a, b) += x[a] * x[b];
                            atb[a] += x[a] * y;
                        }
                    }
                    try {
                        std::vector<double> beta = solve_linear_system(ata, atb);
                        e.coef.assign(beta.begin(), beta.end() - 1);
                        e.intercept = beta.back();
                    } catch (const std::runtime_error&) {
                        ok = false;  // singular design
                    }
                }
                if (!ok) {
                    if (log)
                        log->warn("preprocess",
                                  "regression imputation for '" + sch.name +
                                      "' fell back to mean (no usable predictors)");
                    e.mode = NumericImpute::mean;
                    e.predictors.clear();
                    e.predictor_means.clear();
                    e.coef.clear();
                    e.value = detail::observed_mean(train_col);
                }
            }
            st.numeric_impute[sch.name] = std::move(e);
        } else {
            // Categorical: count observed train categories.
            std::vector<std::size_t> counts(sch.categories.size(), 0);
            std::size_t total = 0;
            for (double v : train_col) {
                if (cell_missing(v)) continue;
                ++counts[static_cast<std::size_t>(v)];
                ++total;
            }
            std::size_t mode_idx = 0;
            for (std::size_t i = 1; i < counts.size(); ++i)
                if (counts[i] > counts[mode_idx]) mode_idx = i;  // tie -> lowest index
            st.categorical_fallback_mode[sch.name] = mode_idx;
            if (!has_missing) continue;
            CategoricalImputeEntry e;
            e.mode = ac.imputation.categorical;
            e.mode_index = mode_idx;
            if (e.mode == CategoricalImpute::random_sample) {
                double cum = 0.0;
                for (std::size_t cnt : counts) {
                    cum += static_cast<double>(cnt) / static_cast<double>(total);
                    e.cumulative.push_back(cum);
                }
                e.cumulative.back() = 1.0;  // guard against rounding
            }
            st.categorical_impute[sch.name] = std::move(e);
        }
    }

    // Pass 3: standardization / min-max parameters on the imputed train
    // columns (numeric features only; one-hot columns stay raw 0/1).
    const bool want_std = ac.preprocessing.standardization_feature;
    const bool want_mm = ac.preprocessing.scaling_feature;
    if (want_std || want_mm) {
        for (std::size_t c : feature_cols) {
            const ColumnSchema& sch = ds.schemas[c];
            if (sch.kind != ColumnKind::numeric) continue;
            std::vector<double> col;
            col.reserve(ds.train_rows.size());
            const auto it = st.numeric_impute.find(sch.name);
            for (std::size_t r : ds.train_rows) {
                double v = ds.cells(r, c);
                if (cell_missing(v)) {
                    const NumericImputeEntry& e = it->second;
                    if (e.mode == NumericImpute::regression) {
                        v = e.intercept;
                        for (std::size_t j = 0; j < e.predictors.size(); ++j) {
                            double pv = ds.cells(r, *ds.column_index(e.predictors[j]));
                            if (cell_missing(pv)) pv = e.predictor_means[j];
                            v += e.coef[j] * pv;
                        }
                    } else {
                        v = e.value;
                    }
                }
                col.push_back(v);
            }
            if (want_std)
                st.feature_standardize[sch.name] = detail::mean_std(col);
            else
                st.feature_minmax[sch.name] = detail::min_max(col);
        }
    }

    // Label transform (regression only; config validation already enforced).
    if (ac.preprocessing.standardization_label || ac.preprocessing.scaling_label) {
        std::size_t label_col = ds.n_cols();
        for (std::size_t c = 0; c < ds.n_cols(); ++c)
            if (ds.schemas[c].role == ColumnRole::label) {
                label_col = c;
                break;
            }
        if (label_col == ds.n_cols()) throw DataError("no label column for label transform");
        if (ds.schemas[label_col].kind != ColumnKind::numeric)
            throw DataError("label transform requires a numeric label column");
        std::vector<double> y;
        for (std::size_t r : ds.train_rows) {
            double v = ds.cells(r, label_col);
            if (!cell_missing(v)) y.push_back(v);
        }
        if (y.empty()) throw DataError("label transform: no observed train labels");
        LabelTransform lt;
        lt.standardize = ac.preprocessing.standardization_label;
        if (lt.standardize) {
            auto [m, s] = detail::mean_std(y);
            lt.a = m;
            lt.b = s;
        } else {
            auto [lo, hi] = detail::min_max(y);
            lt.a = lo;
            lt.b = hi;
        }
        st.label_transform = lt;
    }
    return st;
}

namespace detail {

inline double impute_numeric_cell(const PreprocessState& st, const TabularDataset& ds,
                                  std::size_t row, const std::string& name) {
    const auto it = st.numeric_impute.find(name);
    if (it == st.numeric_impute.end()) {
        const auto fb = st.numeric_fallback_mean.find(name);
        if (fb == st.numeric_fallback_mean.end())
            throw DataError("no imputation available for column '" + name + "'");
        return fb->second;
    }
    const NumericImputeEntry& e = it->second;
    if (e.mode != NumericImpute::regression) return e.value;
    double v = e.intercept;
    for (std::size_t j = 0; j < e.predictors.size(); ++j) {
        double pv = missing_cell();
        const auto pc = ds.column_index(e.predictors[j]);
        if (pc) pv = ds.cells(row, *pc);
        if (cell_missing(pv)) pv = e.predictor_means[j];
        v += e.coef[j] * pv;
    }
    return v;
}

inline std::size_t impute_categorical_cell(const PreprocessState& st, std::size_t row,
                                           const std::string& name) {
    const auto it = st.categorical_impute.find(name);
    if (it == st.categorical_impute.end()) {
        const auto fb = st.categorical_fallback_mode.find(name);
        if (fb == st.categorical_fallback_mode.end())
            throw DataError("no imputation available for column '" + name + "'");
        return fb->second;
    }
    const CategoricalImputeEntry& e = it->second;
    if (e.mode == CategoricalImpute::most_frequent) return e.mode_index;
    Rng rng(derive_seed(st.seed, fnv1a(name.data(), name.size()), row));
    const double u = rng.uniform01();
    for (std::size_t k = 0; k < e.cumulative.size(); ++k)
        if (u < e.cumulative[k]) return k;
    return e.cumulative.size() - 1;
}

}  // namespace detail

/// Apply a fitted state to every row of `ds`, producing the encoded feature
/// matrix plus raw/transformed label vectors.  MISSING feature cells are
/// always resolvable; this never sees an unresolvable cell.
inline EncodedDataset apply_preprocess(const PreprocessState& st, const TabularDataset& ds) {
    EncodedDataset out;
    const std::size_t n = ds.n_rows();

    // Column plan in schema order.
    struct Plan {
        std::size_t col;
        bool categorical;
        std::size_t width;  // 1 or |categories|
    };
    std::vector<Plan> plan;
    std::size_t total_width = 0;
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        const ColumnSchema& sch = ds.schemas[c];
        if (sch.role != ColumnRole::feature) continue;
        if (std::find(st.dropped_columns.begin(), st.dropped_columns.end(), sch.name) !=
            st.dropped_columns.end())
            continue;
        if (sch.kind == ColumnKind::categorical) {
            plan.push_back({c, true, sch.categories.size()});
            for (const std::string& cat : sch.categories)
                out.feature_names.push_back(sch.name + "=" + cat);
        } else {
            plan.push_back({c, false, 1});
            out.feature_names.push_back(sch.name);
        }
        total_width += plan.back().width;
    }

    out.features = Matrix(n, total_width);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t o = 0;
        for (const Plan& p : plan) {
            const ColumnSchema& sch = ds.schemas[p.col];
            double v = ds.cells(r, p.col);
            if (p.categorical) {
                std::size_t idx = cell_missing(v)
                                      ? detail::impute_categorical_cell(st, r, sch.name)
                                      : static_cast<std::size_t>(v);
                for (std::size_t k = 0; k < p.width; ++k)
                    out.features(r, o + k) = (k == idx) ? 1.0 : 0.0;
            } else {
                if (cell_missing(v)) v = detail::impute_numeric_cell(st, ds, r, sch.name);
                const auto its = st.feature_standardize.find(sch.name);
                if (its != st.feature_standardize.end())
                    v = (v - its->second.first) / its->second.second;
                const auto itm = st.feature_minmax.find(sch.name);
                if (itm != st.feature_minmax.end())
                    v = (v - itm->second.first) / (itm->second.second - itm->second.first);
                out.features(r, o) = v;
            }
            o += p.width;
        }
    }

    // Labels: raw values straight from the dataset.
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        if (ds.schemas[c].role != ColumnRole::label) continue;
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = ds.cells(r, c);
        out.label_names.push_back(ds.schemas[c].name);
        out.labels[ds.schemas[c].name] = std::move(col);
    }

    // Supervised target from the first label column.
    if ((st.task == Task::classification || st.task == Task::regression) &&
        !out.label_names.empty()) {
        const std::vector<double>& raw = out.labels.at(out.label_names.front());
        out.target.resize(n, missing_cell());
        for (std::size_t r = 0; r < n; ++r) {
            double v = raw[r];
            if (cell_missing(v)) continue;
            if (st.task == Task::regression && st.label_transform) {
                const LabelTransform& lt = *st.label_transform;
                v = lt.standardize ? (v - lt.a) / lt.b : (v - lt.a) / (lt.b - lt.a);
            }
            out.target[r] = v;
        }
    }
    return out;
}

/// Map regression predictions back to raw label units.
inline std::vector<double> invert_label_transform(const PreprocessState& st,
                                                  const std::vector<double>& preds) {
    if (st.task != Task::regression)
        throw ConfigError("label transform inversion is defined for regression only");
    std::vector<double> out(preds.size());
    if (!st.label_transform) {
        out = preds;
        return out;
    }
    const LabelTransform& lt = *st.label_transform;
    for (std::size_t i = 0; i < preds.size(); ++i)
        out[i] = lt.standardize ? preds[i] * lt.b + lt.a : preds[i] * (lt.b - lt.a) + lt.a;
    return out;
}

// ---- serialization ---------------------------------------------------------

inline Json to_json(const PreprocessState& st) {
    Json j;
    j["task"] = to_string(st.task);
    j["seed"] = st.seed;
    j["dropped_columns"] = st.dropped_columns;
    Json ni = Json::object();
    for (const auto& [name, e] : st.numeric_impute) {
        Json je;
        je["mode"] = to_string(e.mode);
        if (e.mode == NumericImpute::regression) {
            je["predictors"] = e.predictors;
            Json pm = Json::array();
            for (double v : e.predictor_means) pm.push_back(format_g17(v));
            je["predictor_means"] = pm;
            Json cf = Json::array();
            for (double v : e.coef) cf.push_back(format_g17(v));
            je["coef"] = cf;
            je["intercept"] = format_g17(e.intercept);
        } else {
            je["value"] = format_g17(e.value);
        }
        ni[name] = je;
    }
    j["numeric_impute"] = ni;
    Json ci = Json::object();
    for (const auto& [name, e] : st.categorical_impute) {
        Json je;
        je["mode"] = to_string(e.mode);
        je["mode_index"] = e.mode_index;
        if (e.mode == CategoricalImpute::random_sample) {
            Json cm = Json::array();
            for (double v : e.cumulative) cm.push_back(format_g17(v));
            je["cumulative"] = cm;
        }
        ci[name] = je;
    }
    j["categorical_impute"] = ci;
    Json nf = Json::object();
    for (const auto& [name, v] : st.numeric_fallback_mean) nf[name] = format_g17(v);
    j["numeric_fallback_mean"] = nf;
    Json cf = Json::object();
    for (const auto& [name, v] : st.categorical_fallback_mode) cf[name] = v;
    j["categorical_fallback_mode"] = cf;
    Json fs = Json::object();
    for (const auto& [name, p] : st.feature_standardize)
        fs[name] = Json{{"mean", format_g17(p.first)}, {"std", format_g17(p.second)}};
    j["feature_standardize"] = fs;
    Json fm = Json::object();
    for (const auto& [name, p] : st.feature_minmax)
        fm[name] = Json{{"min", format_g17(p.first)}, {"max", format_g17(p.second)}};
    j["feature_minmax"] = fm;
    if (st.label_transform) {
        const LabelTransform& lt = *st.label_transform;
        j["label_transform"] = Json{{"kind", lt.standardize ? "standardize" : "minmax"},
                                    {"a", format_g17(lt.a)},
                                    {"b", format_g17(lt.b)}};
    } else {
        j["label_transform"] = nullptr;
    }
    return j;
}

inline PreprocessState preprocess_state_from_json(const Json& j) {
    PreprocessState st;
    st.task = task_from_string(j.at("task").get<std::string>());
    st.seed = j.at("seed").get<std::uint64_t>();
    st.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
    for (const auto& [name, je] : j.at("numeric_impute").items()) {
        NumericImputeEntry e;
        e.mode = numeric_impute_from_string(je.at("mode").get<std::string>());
        if (e.mode == NumericImpute::regression) {
            e.predictors = je.at("predictors").get<std::vector<std::string>>();
            for (const auto& v : je.at("predictor_means"))
                e.predictor_means.push_back(parse_g17(v.get<std::string>()));
            for (const auto& v : je.at("coef")) e.coef.push_back(parse_g17(v.get<std::string>()));
            e.intercept = parse_g17(je.at("intercept").get<std::string>());
        } else {
            e.value = parse_g17(je.at("value").get<std::string>());
        }
        st.numeric_impute[name] = std::move(e);
    }
    for (const auto& [name, je] : j.at("categorical_impute").items()) {
        CategoricalImputeEntry e;
        e.mode = categorical_impute_from_string(je.at("mode").get<std::string>());
        e.mode_index = je.at("mode_index").get<std::size_t>();
        if (e.mode == CategoricalImpute::random_sample)
            for (const auto& v : je.at("cumulative"))
                e.cumulative.push_back(parse_g17(v.get<std::string>()));
        st.categorical_impute[name] = std::move(e);
    }
    for (const auto& [name, v] : j.at("numeric_fallback_mean").items())
        st.numeric_fallback_mean[name] = parse_g17(v.get<std::string>());
    for (const auto& [name, v] : j.at("categorical_fallback_mode").items())
        st.categorical_fallback_mode[name] = v.get<std::size_t>();
    for (const auto& [name, p] : j.at("feature_standardize").items())
        st.feature_standardize[name] = {parse_g17(p.at("mean").get<std::string>()),
                                        parse_g17(p.at("std").get<std::string>())};
    for (const auto& [name, p] : j.at("feature_minmax").items())
        st.feature_minmax[name] = {parse_g17(p.at("min").get<std::string>()),
                                   parse_g17(p.at("max").get<std::string>())};
    if (!j.at("label_transform").is_null()) {
        const Json& lj = j.at("label_transform");
        LabelTransform lt;
        lt.standardize = lj.at("kind").get<std::string>() == "standardize";
        lt.a = parse_g17(lj.at("a").get<std::string>());
        lt.b = parse_g17(lj.at("b").get<std::string>());
        st.label_transform = lt;
    }
    return st;
}

}  // namespace riskpipe

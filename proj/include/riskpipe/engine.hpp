#pragma once

// Pipeline orchestration: training runs (read -> split -> preprocess ->
// resample -> select/fit -> score -> persist) and pretrained prediction runs.
// Emits the results JSON, the model bundle, per-row predictions, and the run
// log; any stage failure is logged with stage name, run id, and cause.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "riskpipe/bundle.hpp"
#include "riskpipe/config.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/json_util.hpp"
#include "riskpipe/log.hpp"
#include "riskpipe/metrics.hpp"
#include "riskpipe/model.hpp"
#include "riskpipe/model_select.hpp"
#include "riskpipe/preprocess.hpp"
#include "riskpipe/shap.hpp"
#include "riskpipe/smote.hpp"

namespace riskpipe {

struct RunArtifacts {
    Json results = Json::object();
    std::string results_path;
    std::string bundle_path;       // training runs only
    std::string predictions_path;  // prediction runs only
    std::string log_path;
};

namespace detail {

template <typename F>
auto run_stage(Logger& log, const std::string& stage, std::uint64_t run_id, F&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        log.error(stage, "run " + std::to_string(run_id) + " aborted: " + e.what());
        throw;
    }
}

inline void write_text_file(const std::string& path, const std::string& text, Logger& log,
                            const std::string& stage) {
    if (std::filesystem::exists(path))
        log.info(stage, "overwriting existing file " + path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << text;
    log.info(stage, "wrote " + path);
}

/// Metric values + positive-class note (binary) + degenerate-metric list.
inline Json metric_block(MetricReport rep, std::optional<double> positive_class) {
    Json block = std::move(rep.values);
    if (positive_class) block["positive_class"] = *positive_class;
    if (!rep.degenerate.empty()) block["degenerate"] = rep.degenerate;
    return block;
}

/// Column indices of the model's feature order within the encoded names.
inline std::vector<std::size_t> model_columns(const std::vector<std::string>& encoded,
                                              const std::vector<std::string>& wanted) {
    std::vector<std::size_t> out;
    out.reserve(wanted.size());
    for (const std::string& name : wanted) {
        const auto it = std::find(encoded.begin(), encoded.end(), name);
        if (it == encoded.end())
            throw DataError("encoded data lacks model feature \"" + name + "\"");
        out.push_back(static_cast<std::size_t>(it - encoded.begin()));
    }
    return out;
}

inline Json classification_block(const FittedModel& m, const Matrix& X,
                                 const std::vector<double>& y_true, Logger& log) {
    std::vector<double> classes = m.classes;
    bool unseen = false;
    for (const double v : y_true)
        if (!std::binary_search(m.classes.begin(), m.classes.end(), v)) {
            classes.push_back(v);
            unseen = true;
        }
    if (unseen) {
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        log.warn("metrics", "labels contain classes unseen in training; "
                            "probability-based metrics are skipped");
    }
    const std::vector<double> y_pred = predict_model(m, X);
    std::optional<Matrix> proba;
    if (!unseen) proba = predict_proba_model(m, X);
    const MetricReport rep =
        classification_metrics(y_true, y_pred, classes, proba ? &*proba : nullptr);
    std::optional<double> positive;
    if (classes.size() == 2) positive = classes[1];
    return metric_block(rep, positive);
}

inline Json regression_block(const FittedModel& m, const PreprocessState& st, const Matrix& X,
                             const std::vector<double>& y_raw) {
    const std::vector<double> pred = invert_label_transform(st, predict_model(m, X));
    return metric_block(regression_metrics(y_raw, pred), std::nullopt);
}

/// Distinct doubles -> dense int ids in first-appearance order.
inline std::vector<int> dense_int_labels(const std::vector<double>& values) {
    std::map<double, int> ids;
    std::vector<int> out;
    out.reserve(values.size());
    for (const double v : values) {
        const auto it = ids.emplace(v, static_cast<int>(ids.size())).first;
        out.push_back(it->second);
    }
    return out;
}

/// Per-label clustering metric blocks, each including
/// the Silhouette of the predicted partition.  With no usable label columns
/// and allow_internal set, a single "internal" block carries the Silhouette.
inline Json clustering_blocks(const Matrix& X_used, const std::vector<int>& pred,
                              const std::vector<std::string>& label_names,
                              const std::map<std::string, std::vector<double>>& label_cols,
                              const std::vector<std::size_t>& rows, bool allow_internal,
                              Logger& log) {
    double silhouette = 0.0;
    bool silhouette_ok = true;
    try {
        silhouette = silhouette_score(X_used, pred);
    } catch (const MetricError& e) {
        silhouette_ok = false;
        log.warn("metrics", std::string("silhouette degenerate: ") + e.what());
    }

    Json out = Json::object();
    for (const std::string& name : label_names) {
        const std::vector<double>& col = label_cols.at(name);
        std::vector<double> truths;
        std::vector<int> preds;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (cell_missing(col[rows[i]])) continue;
            truths.push_back(col[rows[i]]);
            preds.push_back(pred[i]);
        }
        if (truths.empty()) {
            log.info("metrics", "label column \"" + name + "\" has no observed values; skipped");
            continue;
        }
        MetricReport rep = clustering_external_metrics(dense_int_labels(truths), preds);
        rep.values["Silhouette"] = silhouette;
        if (!silhouette_ok) rep.degenerate.push_back("Silhouette");
        out[name] = metric_block(std::move(rep), std::nullopt);
    }
    if (out.empty() && allow_internal) {
        MetricReport rep;
        rep.values["Silhouette"] = silhouette;
        if (!silhouette_ok) rep.degenerate.push_back("Silhouette");
        out["internal"] = metric_block(std::move(rep), std::nullopt);
    }
    return out;
}

/// One concrete parameter assignment from a (possibly grid-bearing) list by
/// taking every entry's first value.
inline std::vector<std::pair<std::string, ParamValue>> single_point(const ParamList& params) {
    std::vector<std::pair<std::string, ParamValue>> out;
    out.reserve(params.size());
    for (const auto& [name, entry] : params) out.emplace_back(name, entry.values.front());
    return out;
}

}  // namespace detail

/// Train per the two configuration documents, then persist bundle + results.
inline RunArtifacts run_training(const DataConfig& dc, const AlgoConfig& ac,
                                 const std::string& data_path, const std::string& out_dir,
                                 bool console_log = true) {
    namespace fs = std::filesystem;
    using detail::run_stage;
    fs::create_directories(out_dir);
    const std::string tag = dc.log_prefix + "_" + std::to_string(dc.run_id);

    RunArtifacts art;
    art.log_path = (fs::path(out_dir) / (tag + ".log")).string();
    Logger log;
    log.set_console(console_log);
    const bool log_existed = fs::exists(art.log_path);
    log.attach_file(art.log_path);
    if (log_existed) log.info("engine", "overwriting existing log " + art.log_path);
    log.info("engine", "training run " + std::to_string(dc.run_id) + " starting");

    // -- validate ---------------------------------------------------------
    run_stage(log, "validate", dc.run_id, [&] {
        const std::vector<std::string> violations = validate_cross(dc, ac);
        if (!violations.empty()) {
            std::string msg = "configuration invalid:";
            for (const std::string& v : violations) msg += " " + v + ";";
            throw ConfigError(msg);
        }
        bool any_axis = false;
        for (const auto& [name, entry] : ac.algorithm_params)
            if (entry.is_grid_axis) any_axis = true;
        if (any_axis && ac.task == Task::clustering)
            throw ConfigError("parameter grids require a supervised task "
                              "(clustering offers no cross-validation target)");
        return 0;
    });

    // -- read + split -----------------------------------------------------
    TabularDataset ds = run_stage(log, "read_data", dc.run_id,
                                  [&] { return read_csv_dataset(data_path, dc, &log); });
    if (dc.phase == Phase::training_predict)
        ds = run_stage(log, "split", dc.run_id,
                       [&] { return split_dataset(std::move(ds), dc, &log); });
    freeze_categories_to_train(ds);

    // -- preprocess ---------------------------------------------------------
    const PreprocessState st = run_stage(log, "preprocess", dc.run_id, [&] {
        return fit_preprocess(ds, ac, derive_seed(dc.seed, seed_domain::impute), &log);
    });
    const EncodedDataset enc =
        run_stage(log, "preprocess", dc.run_id, [&] { return apply_preprocess(st, ds); });
    if (enc.features.cols == 0)
        throw DataError("no usable feature columns remain after preprocessing");

    const bool supervised = ac.task != Task::clustering;
    std::vector<std::size_t> fit_rows;
    for (const std::size_t r : ds.train_rows) {
        if (supervised && cell_missing(enc.target[r])) continue;
        fit_rows.push_back(r);
    }
    if (supervised && fit_rows.size() < ds.train_rows.size())
        log.info("engine", std::to_string(ds.train_rows.size() - fit_rows.size()) +
                               " training row(s) without label dropped from fitting");
    if (fit_rows.empty()) throw DataError("no labeled training rows to fit on");

    const Matrix Xtr = select_rows(enc.features, fit_rows);
    std::vector<double> ytr;
    if (supervised) ytr = select_idx(enc.target, fit_rows);

    // -- resample + select + fit ----------------------------------------------
    bool any_axis = false;
    for (const auto& [name, entry] : ac.algorithm_params)
        if (entry.is_grid_axis) any_axis = true;

    FittedModel model;
    std::vector<std::size_t> used_columns;
    std::optional<RfeResult> rfe_result;
    std::optional<CvReport> cv_report;
    run_stage(log, "fit", dc.run_id, [&] {
        if (any_axis) {
            GridSearchSeeds seeds;
            seeds.cv = derive_seed(dc.seed, seed_domain::cv);
            seeds.refit_model = derive_seed(dc.seed, seed_domain::model);
            seeds.refit_smote = derive_seed(dc.seed, seed_domain::smote);
            GridSearchOutcome gs = grid_search(
                ac.algorithm, ac.task, ac.algorithm_params, Xtr, ytr, enc.feature_names,
                static_cast<std::size_t>(ac.cv_folds), "", seeds, ac.smote, ac.rfe, &log);
            model = std::move(gs.model);
            used_columns = std::move(gs.used_columns);
            rfe_result = std::move(gs.rfe);
            cv_report = std::move(gs.report);
        } else {
            FitPlan plan;
            plan.spec = resolve_spec(ac.algorithm, ac.task,
                                     detail::single_point(ac.algorithm_params),
                                     derive_seed(dc.seed, seed_domain::model));
            plan.spec.seed = derive_seed(dc.seed, seed_domain::model);
            if (supervised) {
                plan.smote = ac.smote.enabled;
                plan.smote_k = ac.smote.k_neighbors;
                plan.rfe = ac.rfe.enabled;
                plan.rfe_select = static_cast<std::size_t>(ac.rfe.n_features_to_select);
                FitOutcome outcome =
                    fit_with_plan(plan, Xtr, ytr, enc.feature_names,
                                  derive_seed(dc.seed, seed_domain::smote), &log);
                model = std::move(outcome.model);
                used_columns = std::move(outcome.used_columns);
                rfe_result = std::move(outcome.rfe);
            } else {
                model = fit_model(plan.spec, Xtr, nullptr, enc.feature_names);
                used_columns.resize(Xtr.cols);
                std::iota(used_columns.begin(), used_columns.end(), std::size_t{0});
            }
        }
        return 0;
    });
    log.info("fit", to_string(ac.algorithm) + " fitted on " + std::to_string(Xtr.rows) +
                        " rows, " + std::to_string(model.n_features()) + " feature(s)");

    // -- training metrics -----------------------------------------------------
    const Matrix Xtr_used = select_cols(Xtr, used_columns);
    const Json metrics_training = run_stage(log, "metrics", dc.run_id, [&]() -> Json {
        if (supervised) {
            const std::string& label = enc.label_names.front();
            Json block;
            if (ac.task == Task::classification) {
                block = detail::classification_block(model, Xtr_used, ytr, log);
            } else {
                const std::vector<double> y_raw = select_idx(enc.labels.at(label), fit_rows);
                block = detail::regression_block(model, st, Xtr_used, y_raw);
            }
            return Json{{label, std::move(block)}};
        }
        return detail::clustering_blocks(Xtr_used, model.train_labels(), enc.label_names,
                                         enc.labels, fit_rows, /*allow_internal=*/true, log);
    });

    // -- testing metrics (training_predict phase) ---------------------------------
    std::optional<Json> testing_set;
    if (dc.phase == Phase::training_predict) {
        testing_set = run_stage(log, "metrics", dc.run_id, [&]() -> std::optional<Json> {
            if (supervised) {
                std::vector<std::size_t> rows;
                for (const std::size_t r : ds.test_rows)
                    if (!cell_missing(enc.target[r])) rows.push_back(r);
                if (rows.empty()) {
                    log.info("metrics", "no labeled test rows; testing_set omitted");
                    return std::nullopt;
                }
                const Matrix Xte = select_cols(select_rows(enc.features, rows), used_columns);
                const std::string& label = enc.label_names.front();
                Json block;
                if (ac.task == Task::classification) {
                    block = detail::classification_block(model, Xte,
                                                         select_idx(enc.target, rows), log);
                } else {
                    block = detail::regression_block(model, st, Xte,
                                                     select_idx(enc.labels.at(label), rows));
                }
                return Json{{label, std::move(block)}};
            }
            const Matrix Xte =
                select_cols(select_rows(enc.features, ds.test_rows), used_columns);
            std::vector<int> pred;
            for (const double v : predict_model(model, Xte))
                pred.push_back(static_cast<int>(v));
            Json blocks = detail::clustering_blocks(Xte, pred, enc.label_names, enc.labels,
                                                    ds.test_rows, /*allow_internal=*/true, log);
            return blocks;
        });
    }

    // -- attributions -----------------------------------------------------------
    std::optional<Json> shap_meta;
    std::optional<Json> shap_values;
    if (ac.shap.enabled && !supervised)
        log.warn("explain", "shap is defined for supervised models only; skipped");
    if (ac.shap.enabled && supervised) {
        run_stage(log, "explain", dc.run_id, [&] {
            const std::uint64_t shap_base = derive_seed(dc.seed, seed_domain::shap);
            // Background: up to 50 seeded training rows.
            std::vector<std::size_t> bg_local(Xtr_used.rows);
            std::iota(bg_local.begin(), bg_local.end(), std::size_t{0});
            if (bg_local.size() > 50) {
                Rng rng(derive_seed(shap_base, 0));
                rng.shuffle(bg_local);
                bg_local.resize(50);
                std::sort(bg_local.begin(), bg_local.end());
            }
            const Matrix background = select_rows(Xtr_used, bg_local);
            const std::size_t n_explain = std::min<std::size_t>(100, Xtr_used.rows);
            const std::size_t p = model.n_features();

            const bool exact = ac.shap.mode == ShapMode::exact ||
                               (ac.shap.mode == ShapMode::auto_select && p <= 12);
            const std::size_t n_coalitions =
                p >= 12 ? 2048 : std::min<std::size_t>(std::size_t{1} << p, 2048);

            // Regression attributions are mapped back to raw label units; the
            // inverse transform is affine, so contributions scale by its slope.
            double out_scale = 1.0, out_shift = 0.0;
            if (ac.task == Task::regression && st.label_transform) {
                const LabelTransform& lt = *st.label_transform;
                out_scale = lt.standardize ? lt.b : lt.b - lt.a;
                out_shift = lt.a;
            }
            const std::size_t n_class_outputs =
                ac.task == Task::classification && model.classes.size() > 2
                    ? model.classes.size()
                    : 1;

            Json rows = Json::array();
            Json base = Json::array();
            std::vector<std::size_t> explained;
            for (std::size_t i = 0; i < n_explain; ++i) {
                const double* x = Xtr_used.row_ptr(i);
                Json row_out = Json::array();
                Json row_base = Json::array();
                for (std::size_t c = 0; c < n_class_outputs; ++c) {
                    const std::size_t class_index =
                        ac.task == Task::classification && model.classes.size() == 2 ? 1 : c;
                    const Attribution a =
                        exact ? shapley_exact(model, x, background, class_index)
                              : shapley_kernel(model, x, background, n_coalitions,
                                               derive_seed(shap_base, i + 1, c), class_index);
                    Json phi = Json::array();
                    for (const double v : a.phi) phi.push_back(v * out_scale);
                    if (n_class_outputs == 1) {
                        row_out = std::move(phi);
                        row_base = Json(a.base_value * out_scale +
                                        (ac.task == Task::regression ? out_shift : 0.0));
                    } else {
                        row_out.push_back(std::move(phi));
                        row_base.push_back(a.base_value);
                    }
                }
                rows.push_back(std::move(row_out));
                if (i == 0) base = std::move(row_base);
                explained.push_back(fit_rows[i]);
            }
            Json meta;
            meta["mode"] = exact ? "exact" : "kernel";
            meta["feature_names"] = model.feature_order;
            meta["base_value"] = std::move(base);
            meta["rows"] = explained;
            if (n_class_outputs > 1) {
                Json cv = Json::array();
                for (const double c : model.classes) cv.push_back(c);
                meta["class_values"] = std::move(cv);
            }
            shap_meta = std::move(meta);
            shap_values = std::move(rows);
            return 0;
        });
        log.info("explain", "attributions computed");
    }

    // -- bundle ------------------------------------------------------------------
    ModelBundle bundle;
    bundle.description = ac.description;
    bundle.data_config = to_json(dc);
    bundle.algo_config = to_json(ac);
    {
        Json resolved = Json::object();
        for (const auto& [name, value] : model.spec.params)
            resolved[name] = detail::param_value_to_json(value);
        bundle.algo_config["algorithm"]["parameters"][ac.algorithm_name] = std::move(resolved);
    }
    bundle.schemas = ds.schemas;
    bundle.preprocess = st;
    bundle.model = model;
    if (rfe_result) bundle.rfe = to_json(*rfe_result);
    if (cv_report) bundle.cv_report = to_json(*cv_report);
    bundle.training_metrics = metrics_training;
    bundle.seed = dc.seed;
    art.bundle_path = run_stage(log, "bundle", dc.run_id, [&] {
        return save_bundle(bundle, out_dir, dc.log_prefix, dc.run_id, &log);
    });

    // -- results -------------------------------------------------------------------
    Json results;
    results["config_data"] = Json{{"metrics_training", metrics_training}};
    results["description"] = ac.description;
    if (testing_set && *testing_set != Json(nullptr)) results["testing_set"] = *testing_set;
    if (const auto weights = feature_weights_model(model)) {
        Json fi = Json::object();
        for (std::size_t j = 0; j < weights->size(); ++j)
            fi[model.feature_order[j]] = (*weights)[j];
        results["feature_importance"] = std::move(fi);
    }
    if (rfe_result) results["rfe"] = to_json(*rfe_result);
    if (cv_report) results["cv_report"] = to_json(*cv_report);
    if (shap_meta) {
        results["shap"] = *shap_meta;
        results["shap_values"] = *shap_values;
    }
    art.results_path = (fs::path(out_dir) / (tag + "_training.json")).string();
    run_stage(log, "write_results", dc.run_id, [&] {
        detail::write_text_file(art.results_path, results.dump(1) + "\n", log, "write_results");
        return 0;
    });
    art.results = std::move(results);
    log.info("engine", "training run " + std::to_string(dc.run_id) + " finished");
    return art;
}

/// Apply a stored bundle to new data: predictions file + evaluation metrics.
inline RunArtifacts run_predict_pretrained(const PredictConfig& pc, const std::string& data_path,
                                           const std::string& bundles_dir,
                                           const std::string& out_dir, bool console_log = true) {
    namespace fs = std::filesystem;
    using detail::run_stage;
    fs::create_directories(out_dir);
    const std::string tag = pc.log_prefix + "_" + std::to_string(pc.run_id);

    RunArtifacts art;
    art.log_path = (fs::path(out_dir) / (tag + ".log")).string();
    Logger log;
    log.set_console(console_log);
    const bool log_existed = fs::exists(art.log_path);
    log.attach_file(art.log_path);
    if (log_existed) log.info("engine", "overwriting existing log " + art.log_path);
    log.info("engine", "prediction run " + std::to_string(pc.run_id) + " starting");

    const ModelBundle bundle = run_stage(log, "resolve_bundle", pc.run_id, [&] {
        const std::string path = resolve_bundle(bundles_dir, pc.description, &log);
        log.info("resolve_bundle", "using bundle " + path);
        return load_bundle(path);
    });

    const TabularDataset ds = run_stage(log, "read_data", pc.run_id, [&] {
        return read_predict_data(data_path, bundle.schemas, &log);
    });
    if (ds.n_rows() == 0) throw DataError("prediction data holds no rows");

    const EncodedDataset enc = run_stage(log, "preprocess", pc.run_id,
                                         [&] { return apply_preprocess(bundle.preprocess, ds); });

    const Task task = bundle.model.spec.task;
    const std::vector<std::size_t> used =
        detail::model_columns(enc.feature_names, bundle.model.feature_order);
    const Matrix X = select_cols(enc.features, used);
    const std::vector<double> raw_pred = run_stage(
        log, "predict", pc.run_id, [&] { return predict_model(bundle.model, X); });
    const std::vector<double> final_pred =
        task == Task::regression ? invert_label_transform(bundle.preprocess, raw_pred)
                                 : raw_pred;

    // -- predictions file -------------------------------------------------------
    art.predictions_path = (fs::path(out_dir) / (tag + "_predictions.csv")).string();
    run_stage(log, "write_predictions", pc.run_id, [&] {
        TabularDataset out;
        const std::size_t n = ds.n_rows();
        // Identifier column: the stored id column when present, else row index.
        std::optional<std::size_t> id_col;
        for (std::size_t c = 0; c < ds.n_cols(); ++c)
            if (ds.schemas[c].role == ColumnRole::id) id_col = c;

        ColumnSchema ids;
        ids.role = ColumnRole::id;
        if (id_col) {
            ids = ds.schemas[*id_col];
        } else {
            ids.name = "row";
            ids.kind = ColumnKind::numeric;
        }
        ColumnSchema pred_schema;
        pred_schema.name = "prediction";
        pred_schema.kind = ColumnKind::numeric;
        if (task == Task::classification) {
            // Categorical label: write the category text, not its index.
            for (const ColumnSchema& s : bundle.schemas)
                if (s.role == ColumnRole::label && s.kind == ColumnKind::categorical) {
                    pred_schema.kind = ColumnKind::categorical;
                    pred_schema.categories = s.categories;
                    break;
                }
        }
        out.schemas = {ids, pred_schema};
        out.cells = Matrix(n, 2, missing_cell());
        for (std::size_t r = 0; r < n; ++r) {
            out.cells(r, 0) =
                id_col ? ds.cells(r, *id_col) : static_cast<double>(r);
            out.cells(r, 1) = final_pred[r];
        }
        if (fs::exists(art.predictions_path))
            log.info("write_predictions", "overwriting existing file " + art.predictions_path);
        write_csv_dataset(out, art.predictions_path);
        log.info("write_predictions", "wrote " + art.predictions_path);
        return 0;
    });

    // -- metrics (only when label columns are present) ------------------------------
    const std::optional<Json> testing_set =
        run_stage(log, "metrics", pc.run_id, [&]() -> std::optional<Json> {
            if (task == Task::clustering) {
                std::vector<int> pred;
                for (const double v : raw_pred) pred.push_back(static_cast<int>(v));
                std::vector<std::size_t> rows(ds.n_rows());
                std::iota(rows.begin(), rows.end(), std::size_t{0});
                const Json blocks =
                    detail::clustering_blocks(X, pred, enc.label_names, enc.labels, rows,
                                              /*allow_internal=*/false, log);
                if (blocks.empty()) {
                    log.info("metrics", "no label columns; metrics omitted");
                    return std::nullopt;
                }
                return blocks;
            }
            if (enc.label_names.empty()) {
                log.info("metrics", "no label column; metrics omitted");
                return std::nullopt;
            }
            const std::string& label = enc.label_names.front();
            std::vector<std::size_t> rows;
            for (std::size_t r = 0; r < ds.n_rows(); ++r)
                if (!cell_missing(enc.target[r])) rows.push_back(r);
            if (rows.empty()) {
                log.info("metrics", "label column empty; metrics omitted");
                return std::nullopt;
            }
            const Matrix Xl = select_rows(X, rows);
            Json block;
            if (task == Task::classification) {
                block = detail::classification_block(bundle.model, Xl,
                                                     select_idx(enc.target, rows), log);
            } else {
                block = detail::regression_block(bundle.model, bundle.preprocess, Xl,
                                                 select_idx(enc.labels.at(label), rows));
            }
            return Json{{label, std::move(block)}};
        });

    Json results = Json::object();
    if (testing_set) results["testing_set"] = *testing_set;
    art.results_path = (fs::path(out_dir) / (tag + "_predict.json")).string();
    run_stage(log, "write_results", pc.run_id, [&] {
        detail::write_text_file(art.results_path, results.dump(1) + "\n", log, "write_results");
        return 0;
    });
    art.results = std::move(results);
    log.info("engine", "prediction run " + std::to_string(pc.run_id) + " finished");
    return art;
}

}  // namespace riskpipe

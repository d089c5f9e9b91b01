#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "riskpipe/json_util.hpp"

namespace riskpipe {

enum class Phase { training, training_predict };
enum class SplitType { random, sequential };
enum class DatasetFormat { csv, xlsx };
enum class Task { classification, regression, clustering };
enum class CategoricalImpute { random_sample, most_frequent };
enum class NumericImpute { mean, median, regression };
enum class ShapMode { exact, kernel, auto_select };

enum class ModelFamily {
    SGDClassifier,
    ElasticNet,
    GradientBoosting,
    RandomForest,
    MLP,
    SVM,
    KNN,
    KMeans,
    AggClustering,
    DBSCAN,
};

inline const std::vector<std::string>& model_family_names() {
    static const std::vector<std::string> names = {
        "SGDClassifier", "ElasticNet", "GradientBoosting", "RandomForest", "MLP",
        "SVM",           "KNN",        "KMeans",           "AggClustering", "DBSCAN"};
    return names;
}

inline std::string to_string(ModelFamily f) { return model_family_names()[static_cast<int>(f)]; }

inline std::string to_string(Task t) {
    switch (t) {
        case Task::classification: return "classification";
        case Task::regression: return "regression";
        case Task::clustering: return "clustering";
    }
    return "";
}

inline std::string to_string(Phase p) {
    return p == Phase::training ? "training" : "training_predict";
}

inline Task task_from_string(const std::string& s) {
    if (s == "classification") return Task::classification;
    if (s == "regression") return Task::regression;
    if (s == "clustering") return Task::clustering;
    throw ConfigError("unknown task '" + s + "'");
}

inline std::string to_string(NumericImpute m) {
    switch (m) {
        case NumericImpute::mean: return "mean";
        case NumericImpute::median: return "median";
        case NumericImpute::regression: return "regression";
    }
    return "";
}

inline NumericImpute numeric_impute_from_string(const std::string& s) {
    if (s == "mean") return NumericImpute::mean;
    if (s == "median") return NumericImpute::median;
    if (s == "regression") return NumericImpute::regression;
    throw ConfigError("unknown numeric imputation mode '" + s + "'");
}

inline std::string to_string(CategoricalImpute m) {
    return m == CategoricalImpute::random_sample ? "random" : "most_frequent";
}

inline CategoricalImpute categorical_impute_from_string(const std::string& s) {
    if (s == "random") return CategoricalImpute::random_sample;
    if (s == "most_frequent") return CategoricalImpute::most_frequent;
    throw ConfigError("unknown categorical imputation mode '" + s + "'");
}

/// Table I support matrix.
inline bool family_supports_task(ModelFamily f, Task t) {
    switch (f) {
        case ModelFamily::SGDClassifier: return t == Task::classification;
        case ModelFamily::ElasticNet: return t == Task::regression;
        case ModelFamily::GradientBoosting:
        case ModelFamily::RandomForest:
        case ModelFamily::MLP:
        case ModelFamily::SVM:
        case ModelFamily::KNN:
            return t == Task::classification || t == Task::regression;
        case ModelFamily::KMeans:
        case ModelFamily::AggClustering:
        case ModelFamily::DBSCAN:
            return t == Task::clustering;
    }
    return false;
}

/// Families whose fitted models expose per-feature weights (RFE contract).
inline bool family_has_feature_weights(ModelFamily f) {
    switch (f) {
        case ModelFamily::SGDClassifier:
        case ModelFamily::ElasticNet:
        case ModelFamily::SVM:
        case ModelFamily::GradientBoosting:
        case ModelFamily::RandomForest:
            return true;
        default:
            return false;
    }
}

/// One hyper-parameter value: number, text or flag.
using ParamValue = std::variant<double, std::string, bool>;

/// A configured hyper-parameter. A JSON scalar yields one value; a JSON
/// array yields several and marks the parameter as a grid-search axis.
struct ParamEntry {
    std::vector<ParamValue> values;
    bool is_grid_axis = false;
};

/// Ordered (declaration-order) parameter list.
using ParamList = std::vector<std::pair<std::string, ParamEntry>>;

// ---------------------------------------------------------------------------
// Config documents

struct DataConfig {
    std::string log_prefix = "log";
    std::uint64_t run_id = 0;
    std::string dataset_name;
    std::string dataset_type;  // enum {point-in-time}
    DatasetFormat dataset_format = DatasetFormat::csv;
    std::string group;       // stratification column when equal to a label; otherwise recorded only
    std::string patient_id;  // "PatientID" in the document
    std::vector<std::string> labels;
    std::string time;  // recorded, unused for point-in-time data
    std::vector<std::string> features2drop;
    Phase phase = Phase::training;
    std::vector<std::string> categorical_features;
    int split_percentage = 0;  // meaningful only when phase == training_predict
    SplitType split_type = SplitType::random;
    std::uint64_t seed = 0;
};

struct PreprocessingFlags {
    bool standardization_feature = false;
    bool standardization_label = false;
    bool scaling_feature = false;
    bool scaling_label = false;
};

struct ImputationConfig {
    double perc_nan_to_drop = 1.0;  // drop a column when its train missing fraction exceeds this
    CategoricalImpute categorical = CategoricalImpute::most_frequent;
    NumericImpute not_categorical = NumericImpute::mean;
};

struct RfeConfig {
    bool enabled = false;
    int n_features_to_select = 1;
};

struct SmoteSettings {
    bool enabled = false;
    int k_neighbors = 5;
};

struct ShapSettings {
    bool enabled = false;
    ShapMode mode = ShapMode::auto_select;
};

struct AlgoConfig {
    std::string phase = "training";
    std::string config_name;
    std::string description;  // bundle lookup key
    Task task = Task::classification;
    PreprocessingFlags preprocessing;
    ImputationConfig imputation;
    ModelFamily algorithm = ModelFamily::SGDClassifier;
    std::string algorithm_name;
    ParamList algorithm_params;
    RfeConfig rfe;
    SmoteSettings smote;
    ShapSettings shap;
    int cv_folds = 5;
};

struct PredictConfig {
    std::string log_prefix = "log";
    std::uint64_t run_id = 0;
    std::string dataset_name;
    std::string dataset_type;
    std::string dataset_format;
    std::string description;  // must resolve to an existing ModelBundle
};

// ---------------------------------------------------------------------------
// Parse helpers

namespace detail {

inline bool is_comment_key(const std::string& key) { return key.rfind("_comment", 0) == 0; }

inline const Json* find_member(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline std::string require_string(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = find_member(obj, key);
    if (!v) throw ConfigError("missing required field \"" + path + "\"");
    if (!v->is_string()) throw ConfigError("field \"" + path + "\" must be a string");
    return v->get<std::string>();
}

inline std::string optional_string(const Json& obj, const std::string& key, const std::string& path,
                                   const std::string& def) {
    const Json* v = find_member(obj, key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError("field \"" + path + "\" must be a string");
    return v->get<std::string>();
}

inline std::uint64_t require_uint(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = find_member(obj, key);
    if (!v) throw ConfigError("missing required field \"" + path + "\"");
    if (!v->is_number_integer() || (v->is_number_integer() && v->get<long long>() < 0))
        throw ConfigError("field \"" + path + "\" must be a non-negative integer");
    return v->get<std::uint64_t>();
}

inline bool optional_bool(const Json& obj, const std::string& key, const std::string& path, bool def) {
    const Json* v = find_member(obj, key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError("field \"" + path + "\" must be a boolean");
    return v->get<bool>();
}

inline std::vector<std::string> optional_string_array(const Json& obj, const std::string& key,
                                                      const std::string& path) {
    const Json* v = find_member(obj, key);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError("field \"" + path + "\" must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
        if (!e.is_string()) throw ConfigError("field \"" + path + "\" must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline std::string enum_violation(const std::string& path, const std::string& got,
                                  const std::vector<std::string>& allowed) {
    std::string msg = "field \"" + path + "\": invalid value \"" + got + "\" (allowed:";
    for (const auto& a : allowed) msg += " \"" + a + "\"";
    msg += ")";
    return msg;
}

inline ParamValue parse_scalar_param(const Json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>();
    throw ConfigError("field \"" + path + "\" must be a scalar (number, string or boolean)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

/// Parse the data-reading configuration document.
inline DataConfig parse_data_config(const std::string& document) {
    using namespace detail;
    const Json root = parse_json_text(document);
    if (!root.is_object()) throw ConfigError("data config: top level must be a JSON object");

    DataConfig dc;
    if (const Json* services = find_member(root, "services"))
        dc.log_prefix = optional_string(*services, "log_prefix", "services.log_prefix", "log");
    const Json* runtime = find_member(root, "runtime");
    if (!runtime) throw ConfigError("missing required field \"runtime\"");
    dc.run_id = require_uint(*runtime, "run_id", "runtime.run_id");

    const Json* dataset = find_member(root, "dataset");
    if (!dataset) throw ConfigError("missing required field \"dataset\"");
    dc.dataset_name = require_string(*dataset, "name", "dataset.name");
    dc.dataset_type = require_string(*dataset, "type", "dataset.type");
    if (dc.dataset_type != "point-in-time")
        throw ConfigError(enum_violation("dataset.type", dc.dataset_type, {"point-in-time"}));
    const std::string fmt = require_string(*dataset, "format", "dataset.format");
    if (fmt == "csv")
        dc.dataset_format = DatasetFormat::csv;
    else if (fmt == "xlsx")
        dc.dataset_format = DatasetFormat::xlsx;
    else
        throw ConfigError(enum_violation("dataset.format", fmt, {"csv", "xlsx"}));

    dc.group = optional_string(root, "group", "group", "");
    dc.patient_id = require_string(root, "PatientID", "PatientID");
    {
        const Json* labels = find_member(root, "labels");
        if (!labels) throw ConfigError("missing required field \"labels\"");
        if (!labels->is_array()) throw ConfigError("field \"labels\" must be an array of strings");
        for (const auto& e : *labels) {
            if (!e.is_string()) throw ConfigError("field \"labels\" must contain only strings");
            dc.labels.push_back(e.get<std::string>());
        }
    }
    dc.time = optional_string(root, "time", "time", "");
    dc.features2drop = optional_string_array(root, "features2drop", "features2drop");

    const std::string phase = require_string(root, "phase", "phase");
    if (phase == "training")
        dc.phase = Phase::training;
    else if (phase == "training_predict")
        dc.phase = Phase::training_predict;
    else
        throw ConfigError(enum_violation("phase", phase, {"training", "training_predict"}));

    dc.categorical_features = optional_string_array(root, "categorical_features", "categorical_features");

    if (dc.phase == Phase::training_predict) {
        const Json* sp = find_member(root, "split_percentage");
        if (!sp) throw ConfigError("missing required field \"split_percentage\" (phase is training_predict)");
        if (!sp->is_number_integer())
            throw ConfigError("field \"split_percentage\" must be an integer");
        const long long v = sp->get<long long>();
        if (v <= 0 || v >= 100)
            throw ConfigError("field \"split_percentage\" must lie strictly between 0 and 100");
        dc.split_percentage = static_cast<int>(v);
    }
    const std::string st = optional_string(root, "split_type", "split_type", "random");
    if (st == "random")
        dc.split_type = SplitType::random;
    else if (st == "sequential")
        dc.split_type = SplitType::sequential;
    else
        throw ConfigError(enum_violation("split_type", st, {"random", "sequential"}));

    if (const Json* seed = find_member(root, "seed")) {
        if (!seed->is_number_integer() || seed->get<long long>() < 0)
            throw ConfigError("field \"seed\" must be a non-negative integer");
        dc.seed = seed->get<std::uint64_t>();
    }

    for (const auto& label : dc.labels)
        if (std::find(dc.features2drop.begin(), dc.features2drop.end(), label) != dc.features2drop.end())
            throw ConfigError("label \"" + label + "\" also appears in \"features2drop\"");

    return dc;
}

/// Parse the training algorithm configuration document.
inline AlgoConfig parse_algo_config(const std::string& document) {
    using namespace detail;
    const Json root = parse_json_text(document);
    if (!root.is_object()) throw ConfigError("algorithm config: top level must be a JSON object");
    const Json* algo = find_member(root, "algorithm");
    if (!algo) throw ConfigError("missing required field \"algorithm\"");
    if (!algo->is_object()) throw ConfigError("field \"algorithm\" must be an object");

    AlgoConfig ac;
    ac.phase = require_string(*algo, "phase", "algorithm.phase");
    if (ac.phase != "training")
        throw ConfigError(enum_violation("algorithm.phase", ac.phase, {"training"}));
    ac.config_name = optional_string(*algo, "config_name", "algorithm.config_name", "");
    ac.description = require_string(*algo, "description", "algorithm.description");
    if (ac.description.empty()) throw ConfigError("field \"algorithm.description\" must not be empty");

    const std::string task = require_string(*algo, "type", "algorithm.type");
    if (task == "classification")
        ac.task = Task::classification;
    else if (task == "regression")
        ac.task = Task::regression;
    else if (task == "clustering")
        ac.task = Task::clustering;
    else
        throw ConfigError(enum_violation("algorithm.type", task,
                                         {"classification", "regression", "clustering"}));

    const Json* params = find_member(*algo, "parameters");
    if (!params) throw ConfigError("missing required field \"algorithm.parameters\"");
    if (!params->is_object()) throw ConfigError("field \"algorithm.parameters\" must be an object");

    if (const Json* prep = find_member(*params, "preprocessing")) {
        ac.preprocessing.standardization_feature =
            optional_bool(*prep, "standardization_feature", "preprocessing.standardization_feature", false);
        ac.preprocessing.standardization_label =
            optional_bool(*prep, "standardization_label", "preprocessing.standardization_label", false);
        ac.preprocessing.scaling_feature =
            optional_bool(*prep, "scaling_feature", "preprocessing.scaling_feature", false);
        ac.preprocessing.scaling_label =
            optional_bool(*prep, "scaling_label", "preprocessing.scaling_label", false);
    }
    if (const Json* imp = find_member(*params, "data_inputation")) {
        if (const Json* t = find_member(*imp, "perc_nan_to_drop")) {
            if (!t->is_number()) throw ConfigError("field \"data_inputation.perc_nan_to_drop\" must be a number");
            ac.imputation.perc_nan_to_drop = t->get<double>();
            if (ac.imputation.perc_nan_to_drop < 0.0 || ac.imputation.perc_nan_to_drop > 1.0)
                throw ConfigError("field \"data_inputation.perc_nan_to_drop\" must lie in [0, 1]");
        }
        const std::string cat =
            optional_string(*imp, "categorical", "data_inputation.categorical", "most_frequent");
        if (cat == "random")
            ac.imputation.categorical = CategoricalImpute::random_sample;
        else if (cat == "most_frequent")
            ac.imputation.categorical = CategoricalImpute::most_frequent;
        else
            throw ConfigError(enum_violation("data_inputation.categorical", cat, {"random", "most_frequent"}));
        const std::string num =
            optional_string(*imp, "not_categorical", "data_inputation.not_categorical", "mean");
        if (num == "mean")
            ac.imputation.not_categorical = NumericImpute::mean;
        else if (num == "median")
            ac.imputation.not_categorical = NumericImpute::median;
        else if (num == "regression")
            ac.imputation.not_categorical = NumericImpute::regression;
        else
            throw ConfigError(
                enum_violation("data_inputation.not_categorical", num, {"mean", "median", "regression"}));
    }
    if (const Json* rfe = find_member(*params, "rfe")) {
        ac.rfe.enabled = optional_bool(*rfe, "enabled", "rfe.enabled", false);
        if (const Json* n = find_member(*rfe, "n_features_to_select")) {
            if (!n->is_number_integer() || n->get<long long>() <= 0)
                throw ConfigError("field \"rfe.n_features_to_select\" must be a positive integer");
            ac.rfe.n_features_to_select = n->get<int>();
        } else if (ac.rfe.enabled) {
            throw ConfigError("missing required field \"rfe.n_features_to_select\"");
        }
    }
    if (const Json* smote = find_member(*params, "smote")) {
        ac.smote.enabled = optional_bool(*smote, "enabled", "smote.enabled", false);
        if (const Json* k = find_member(*smote, "k_neighbors")) {
            if (!k->is_number_integer() || k->get<long long>() <= 0)
                throw ConfigError("field \"smote.k_neighbors\" must be a positive integer");
            ac.smote.k_neighbors = k->get<int>();
        }
    }
    if (const Json* shap = find_member(*params, "shap")) {
        ac.shap.enabled = optional_bool(*shap, "enabled", "shap.enabled", false);
        const std::string mode = optional_string(*shap, "mode", "shap.mode", "auto");
        if (mode == "exact")
            ac.shap.mode = ShapMode::exact;
        else if (mode == "kernel")
            ac.shap.mode = ShapMode::kernel;
        else if (mode == "auto")
            ac.shap.mode = ShapMode::auto_select;
        else
            throw ConfigError(enum_violation("shap.mode", mode, {"exact", "kernel", "auto"}));
    }
    if (const Json* cv = find_member(*params, "cv_folds")) {
        if (!cv->is_number_integer() || cv->get<long long>() < 2)
            throw ConfigError("field \"cv_folds\" must be an integer >= 2");
        ac.cv_folds = cv->get<int>();
    }

    // The algorithm is the single remaining key under "parameters".
    static const std::vector<std::string> reserved = {"preprocessing", "data_inputation", "rfe",
                                                      "smote",         "shap",            "cv_folds"};
    std::vector<std::string> candidates;
    for (auto it = params->begin(); it != params->end(); ++it) {
        const std::string& key = it.key();
        if (is_comment_key(key)) continue;
        if (std::find(reserved.begin(), reserved.end(), key) != reserved.end()) continue;
        candidates.push_back(key);
    }
    if (candidates.size() != 1) {
        std::string msg = "expected exactly one algorithm key under \"parameters\", found " +
                          std::to_string(candidates.size());
        if (!candidates.empty()) {
            msg += " (";
            for (std::size_t i = 0; i < candidates.size(); ++i)
                msg += (i ? ", " : "") + candidates[i];
            msg += ")";
        }
        throw ConfigError(msg);
    }
    ac.algorithm_name = candidates.front();
    const auto& names = model_family_names();
    const auto found = std::find(names.begin(), names.end(), ac.algorithm_name);
    if (found == names.end())
        throw ConfigError(enum_violation("parameters.<algorithm>", ac.algorithm_name, names));
    ac.algorithm = static_cast<ModelFamily>(found - names.begin());

    const Json& pblock = (*params)[ac.algorithm_name];
    if (!pblock.is_object())
        throw ConfigError("field \"parameters." + ac.algorithm_name + "\" must be an object");
    for (auto it = pblock.begin(); it != pblock.end(); ++it) {
        const std::string& key = it.key();
        if (is_comment_key(key)) continue;
        const std::string path = "parameters." + ac.algorithm_name + "." + key;
        ParamEntry entry;
        if (it.value().is_array()) {
            entry.is_grid_axis = true;
            if (it.value().empty()) throw ConfigError("field \"" + path + "\": grid axis must not be empty");
            for (const auto& e : it.value()) entry.values.push_back(parse_scalar_param(e, path));
        } else {
            entry.values.push_back(parse_scalar_param(it.value(), path));
        }
        ac.algorithm_params.emplace_back(key, entry);
    }

    // Intra-document validation.
    if (!family_supports_task(ac.algorithm, ac.task))
        throw ConfigError("algorithm \"" + ac.algorithm_name + "\" does not support task \"" +
                          to_string(ac.task) + "\"");
    if (ac.preprocessing.standardization_feature && ac.preprocessing.scaling_feature)
        throw ConfigError("standardization_feature and scaling_feature cannot both be enabled");
    if (ac.preprocessing.standardization_label && ac.preprocessing.scaling_label)
        throw ConfigError("standardization_label and scaling_label cannot both be enabled");
    if ((ac.preprocessing.standardization_label || ac.preprocessing.scaling_label) &&
        ac.task != Task::regression)
        throw ConfigError("label standardization/scaling requires task \"regression\"");
    if (ac.rfe.enabled && !family_has_feature_weights(ac.algorithm))
        throw ConfigError("rfe.enabled requires an algorithm exposing feature weights; \"" +
                          ac.algorithm_name + "\" does not");
    if (ac.smote.enabled && ac.task != Task::classification)
        throw ConfigError("smote.enabled requires task \"classification\"");

    return ac;
}

/// Parse the pre-trained model reuse configuration document.
inline PredictConfig parse_predict_config(const std::string& document) {
    using namespace detail;
    const Json root = parse_json_text(document);
    if (!root.is_object()) throw ConfigError("predict config: top level must be a JSON object");

    PredictConfig pc;
    if (const Json* services = find_member(root, "services"))
        pc.log_prefix = optional_string(*services, "log_prefix", "services.log_prefix", "log");
    if (const Json* runtime = find_member(root, "runtime")) {
        if (const Json* rid = find_member(*runtime, "run_id")) {
            if (!rid->is_number_integer() || rid->get<long long>() < 0)
                throw ConfigError("field \"runtime.run_id\" must be a non-negative integer");
            pc.run_id = rid->get<std::uint64_t>();
        }
    }
    if (const Json* dataset = find_member(root, "dataset")) {
        pc.dataset_name = optional_string(*dataset, "name", "dataset.name", "");
        pc.dataset_type = optional_string(*dataset, "type", "dataset.type", "");
        pc.dataset_format = optional_string(*dataset, "format", "dataset.format", "");
    }
    pc.description = require_string(root, "description", "description");
    if (pc.description.empty()) throw ConfigError("field \"description\" must not be empty");
    return pc;
}

/// Cross-check a data config against an algorithm config. Returns every
/// violation found, not just the first; empty result means the pair is valid.
inline std::vector<std::string> validate_cross(const DataConfig& dc, const AlgoConfig& ac) {
    std::vector<std::string> violations;
    if (ac.task != Task::clustering) {
        if (dc.labels.empty())
            violations.push_back("task \"" + to_string(ac.task) + "\" requires a non-empty \"labels\" list");
        else if (dc.labels.size() > 1)
            violations.push_back("task \"" + to_string(ac.task) +
                                 "\" supports exactly one label column, got " +
                                 std::to_string(dc.labels.size()));
    }
    for (const auto& label : dc.labels) {
        if (std::find(dc.categorical_features.begin(), dc.categorical_features.end(), label) !=
            dc.categorical_features.end())
            violations.push_back("label \"" + label + "\" also appears in \"categorical_features\"");
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Canonical serialization (used for bundle echoes; parse(serialize(dc)) is
// the identity on retained fields).

inline Json to_json(const DataConfig& dc) {
    Json j;
    j["services"] = {{"log_prefix", dc.log_prefix}};
    j["runtime"] = {{"run_id", dc.run_id}};
    j["dataset"] = {{"name", dc.dataset_name},
                    {"type", dc.dataset_type},
                    {"format", dc.dataset_format == DatasetFormat::csv ? "csv" : "xlsx"}};
    j["group"] = dc.group;
    j["PatientID"] = dc.patient_id;
    j["labels"] = dc.labels;
    j["time"] = dc.time;
    j["features2drop"] = dc.features2drop;
    j["phase"] = to_string(dc.phase);
    j["categorical_features"] = dc.categorical_features;
    if (dc.phase == Phase::training_predict) j["split_percentage"] = dc.split_percentage;
    j["split_type"] = dc.split_type == SplitType::random ? "random" : "sequential";
    j["seed"] = dc.seed;
    return j;
}

inline Json param_value_to_json(const ParamValue& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
    return std::get<std::string>(v);
}

inline Json to_json(const AlgoConfig& ac) {
    Json params;
    params["preprocessing"] = {{"standardization_feature", ac.preprocessing.standardization_feature},
                               {"standardization_label", ac.preprocessing.standardization_label},
                               {"scaling_feature", ac.preprocessing.scaling_feature},
                               {"scaling_label", ac.preprocessing.scaling_label}};
    params["data_inputation"] = {
        {"perc_nan_to_drop", ac.imputation.perc_nan_to_drop},
        {"categorical",
         ac.imputation.categorical == CategoricalImpute::random_sample ? "random" : "most_frequent"},
        {"not_categorical", ac.imputation.not_categorical == NumericImpute::mean     ? "mean"
                            : ac.imputation.not_categorical == NumericImpute::median ? "median"
                                                                                     : "regression"}};
    Json ap = Json::object();
    for (const auto& [name, entry] : ac.algorithm_params) {
        if (entry.is_grid_axis) {
            Json arr = Json::array();
            for (const auto& v : entry.values) arr.push_back(param_value_to_json(v));
            ap[name] = arr;
        } else {
            ap[name] = param_value_to_json(entry.values.front());
        }
    }
    params[ac.algorithm_name] = ap;
    params["rfe"] = {{"enabled", ac.rfe.enabled}, {"n_features_to_select", ac.rfe.n_features_to_select}};
    params["smote"] = {{"enabled", ac.smote.enabled}, {"k_neighbors", ac.smote.k_neighbors}};
    params["shap"] = {{"enabled", ac.shap.enabled},
                      {"mode", ac.shap.mode == ShapMode::exact    ? "exact"
                               : ac.shap.mode == ShapMode::kernel ? "kernel"
                                                                  : "auto"}};
    params["cv_folds"] = ac.cv_folds;

    Json j;
    j["algorithm"] = {{"phase", ac.phase},
                      {"config_name", ac.config_name},
                      {"description", ac.description},
                      {"type", to_string(ac.task)},
                      {"parameters", params}};
    return j;
}

}  // namespace riskpipe

#pragma once

// Uniform model contract over the ten learner families: resolve parameters
// against per-family defaults, fit, predict, optional probabilities, optional
// feature weights, and lossless JSON (de)serialization of fitted payloads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "riskpipe/boosting.hpp"
#include "riskpipe/cluster.hpp"
#include "riskpipe/config.hpp"
#include "riskpipe/forest.hpp"
#include "riskpipe/json_util.hpp"
#include "riskpipe/knn.hpp"
#include "riskpipe/linear.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/mlp.hpp"
#include "riskpipe/rng.hpp"
#include "riskpipe/tree.hpp"

namespace riskpipe {

class ModelError : public std::runtime_error {
  public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A concrete, fully resolved model recipe (one grid point).
struct ModelSpec {
    ModelFamily family = ModelFamily::KNN;
    Task task = Task::classification;
    std::map<std::string, ParamValue> params;  // post-defaults
    std::uint64_t seed = 0;
};

// ---- parameter access -------------------------------------------------------

namespace detail {

inline const ParamValue& spec_param(const ModelSpec& s, const std::string& name) {
    const auto it = s.params.find(name);
    if (it == s.params.end())
        throw ModelError("missing parameter '" + name + "' for " + to_string(s.family));
    return it->second;
}

inline double spec_double(const ModelSpec& s, const std::string& name) {
    const ParamValue& v = spec_param(s, name);
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ModelError("parameter '" + name + "' must be a number");
}

inline std::size_t spec_size(const ModelSpec& s, const std::string& name) {
    const double d = spec_double(s, name);
    if (d < 0.0 || d != std::floor(d))
        throw ModelError("parameter '" + name + "' must be a non-negative integer");
    return static_cast<std::size_t>(d);
}

inline std::string spec_string(const ModelSpec& s, const std::string& name) {
    const ParamValue& v = spec_param(s, name);
    if (const std::string* t = std::get_if<std::string>(&v)) return *t;
    throw ModelError("parameter '" + name + "' must be a string");
}

inline bool spec_bool(const ModelSpec& s, const std::string& name) {
    const ParamValue& v = spec_param(s, name);
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw ModelError("parameter '" + name + "' must be a boolean");
}

/// Hidden layer sizes: a single number, or a comma-separated string "64,32".
inline std::vector<std::size_t> parse_hidden(const ModelSpec& s) {
    const ParamValue& v = spec_param(s, "hidden");
    std::vector<std::size_t> out;
    if (const double* d = std::get_if<double>(&v)) {
        if (*d < 1.0 || *d != std::floor(*d))
            throw ModelError("parameter 'hidden' must be a positive integer");
        out.push_back(static_cast<std::size_t>(*d));
        return out;
    }
    const std::string text = spec_string(s, "hidden");
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        char* end = nullptr;
        const long val = std::strtol(tok.c_str(), &end, 10);
        if (tok.empty() || *end != '\0' || val < 1)
            throw ModelError("parameter 'hidden' must be positive integers, e.g. \"64,32\"");
        out.push_back(static_cast<std::size_t>(val));
        pos = comma + 1;
    }
    return out;
}

struct FamilyInfo {
    std::vector<std::string> known;
    std::vector<std::string> required;
    std::map<std::string, ParamValue> defaults;
};

inline const FamilyInfo& family_info(ModelFamily f) {
    static const std::map<ModelFamily, FamilyInfo> table = {
        {ModelFamily::SGDClassifier,
         {{"loss", "l2", "epochs", "eta0"},
          {},
          {{"loss", std::string("log")}, {"l2", 1e-4}, {"epochs", 100.0}, {"eta0", 0.1}}}},
        {ModelFamily::ElasticNet,
         {{"alpha", "l1_ratio", "max_iter", "tol"},
          {},
          {{"alpha", 1.0}, {"l1_ratio", 0.5}, {"max_iter", 1000.0}, {"tol", 1e-6}}}},
        {ModelFamily::GradientBoosting,
         {{"n_estimators", "learning_rate", "max_depth"},
          {},
          {{"n_estimators", 100.0}, {"learning_rate", 0.1}, {"max_depth", 3.0}}}},
        {ModelFamily::RandomForest,
         {{"n_estimators", "max_depth", "max_features", "bootstrap"},
          {},
          // max_depth 0 = unlimited; max_features "auto" = sqrt(p) or p/3.
          {{"n_estimators", 100.0},
           {"max_depth", 0.0},
           {"max_features", std::string("auto")},
           {"bootstrap", true}}}},
        {ModelFamily::MLP,
         {{"hidden", "activation", "lr", "epochs", "batch"},
          {},
          {{"hidden", std::string("64")},
           {"activation", std::string("relu")},
           {"lr", 1e-3},
           {"epochs", 200.0},
           {"batch", 32.0}}}},
        {ModelFamily::SVM,
         {{"C", "epochs", "epsilon"},
          {},
          {{"C", 1.0}, {"epochs", 200.0}, {"epsilon", 0.1}}}},
        {ModelFamily::KNN, {{"k"}, {}, {{"k", 5.0}}}},
        {ModelFamily::KMeans,
         {{"n_clusters", "n_init", "max_iter", "tol"},
          {"n_clusters"},
          {{"n_init", 10.0}, {"max_iter", 300.0}, {"tol", 1e-6}}}},
        {ModelFamily::AggClustering,
         {{"n_clusters", "linkage"},
          {"n_clusters"},
          {{"linkage", std::string("average")}}}},
        {ModelFamily::DBSCAN,
         {{"eps", "min_samples"}, {"eps"}, {{"min_samples", 5.0}}}},
    };
    return table.at(f);
}

}  // namespace detail

/// Fill defaults and validate one concrete parameter assignment.
inline ModelSpec resolve_spec(ModelFamily family, Task task,
                              const std::vector<std::pair<std::string, ParamValue>>& params,
                              std::uint64_t seed) {
    if (!family_supports_task(family, task))
        throw ModelError(to_string(family) + " does not support task '" + to_string(task) +
                         "' (see the family/task support matrix)");
    const detail::FamilyInfo& info = detail::family_info(family);
    ModelSpec spec;
    spec.family = family;
    spec.task = task;
    spec.seed = seed;
    for (const auto& [name, value] : params) {
        if (std::find(info.known.begin(), info.known.end(), name) == info.known.end())
            throw ModelError("unknown parameter '" + name + "' for " + to_string(family));
        spec.params[name] = value;
    }
    for (const std::string& name : info.required)
        if (!spec.params.count(name))
            throw ModelError(to_string(family) + " requires parameter '" + name + "'");
    for (const auto& [name, value] : info.defaults) spec.params.emplace(name, value);

    // Value validation.
    using detail::spec_double;
    using detail::spec_size;
    using detail::spec_string;
    switch (family) {
        case ModelFamily::SGDClassifier: {
            const std::string loss = spec_string(spec, "loss");
            if (loss != "log" && loss != "hinge")
                throw ModelError("SGDClassifier loss must be 'log' or 'hinge'");
            spec_size(spec, "epochs");
            if (spec_double(spec, "l2") < 0.0) throw ModelError("l2 must be non-negative");
            break;
        }
        case ModelFamily::ElasticNet:
            if (spec_double(spec, "alpha") < 0.0) throw ModelError("alpha must be non-negative");
            if (spec_double(spec, "l1_ratio") < 0.0 || spec_double(spec, "l1_ratio") > 1.0)
                throw ModelError("l1_ratio must lie in [0, 1]");
            if (spec_size(spec, "max_iter") == 0) throw ModelError("max_iter must be positive");
            break;
        case ModelFamily::GradientBoosting:
            spec_size(spec, "n_estimators");
            if (spec_size(spec, "max_depth") == 0)
                throw ModelError("max_depth must be positive");
            if (spec_double(spec, "learning_rate") < 0.0)
                throw ModelError("learning_rate must be non-negative");
            break;
        case ModelFamily::RandomForest: {
            if (spec_size(spec, "n_estimators") == 0)
                throw ModelError("n_estimators must be positive");
            spec_size(spec, "max_depth");
            detail::spec_bool(spec, "bootstrap");
            const ParamValue& mf = detail::spec_param(spec, "max_features");
            if (const std::string* s = std::get_if<std::string>(&mf)) {
                if (*s != "auto") throw ModelError("max_features must be a number or 'auto'");
            } else {
                if (spec_size(spec, "max_features") == 0)
                    throw ModelError("max_features must be positive");
            }
            break;
        }
        case ModelFamily::MLP:
            detail::parse_hidden(spec);
            detail::activate(spec_string(spec, "activation"), 0.0);
            if (spec_double(spec, "lr") <= 0.0) throw ModelError("lr must be positive");
            spec_size(spec, "epochs");
            if (spec_size(spec, "batch") == 0) throw ModelError("batch must be positive");
            break;
        case ModelFamily::SVM:
            if (spec_double(spec, "C") <= 0.0) throw ModelError("C must be positive");
            spec_size(spec, "epochs");
            if (spec_double(spec, "epsilon") < 0.0)
                throw ModelError("epsilon must be non-negative");
            break;
        case ModelFamily::KNN:
            if (spec_size(spec, "k") == 0) throw ModelError("k must be positive");
            break;
        case ModelFamily::KMeans:
            if (spec_size(spec, "n_clusters") == 0)
                throw ModelError("n_clusters must be positive");
            if (spec_size(spec, "n_init") == 0) throw ModelError("n_init must be positive");
            if (spec_size(spec, "max_iter") == 0) throw ModelError("max_iter must be positive");
            break;
        case ModelFamily::AggClustering:
            if (spec_size(spec, "n_clusters") == 0)
                throw ModelError("n_clusters must be positive");
            linkage_from_string(spec_string(spec, "linkage"));
            break;
        case ModelFamily::DBSCAN:
            if (spec_double(spec, "eps") <= 0.0) throw ModelError("eps must be positive");
            if (spec_size(spec, "min_samples") == 0)
                throw ModelError("min_samples must be positive");
            break;
    }
    return spec;
}

// ---- fitted payloads ----------------------------------------------------------

struct LinearPayload {
    std::vector<LinearModel> members;  // 1 (binary/regression) or k (one-vs-rest)
    std::string loss;                  // log | hinge | squared | epsilon_insensitive | elastic_net
};
struct GbPayload {
    GbModel model;
};
struct ForestPayload {
    ForestModel model;
};
struct MlpPayload {
    MlpModel model;
};
struct KnnPayload {
    KnnModel model;
};
struct KmeansPayload {
    Matrix centroids;
    std::vector<int> train_labels;
    double inertia = 0.0;
};
struct AggPayload {
    Matrix X;
    std::vector<int> train_labels;
    std::vector<std::pair<int, int>> merges;
};
struct DbscanPayload {
    Matrix X;
    std::vector<int> train_labels;
    std::vector<bool> core;
    double eps = 0.0;
};

using ModelPayload = std::variant<LinearPayload, GbPayload, ForestPayload, MlpPayload,
                                  KnnPayload, KmeansPayload, AggPayload, DbscanPayload>;

struct FittedModel {
    ModelSpec spec;
    std::vector<std::string> feature_order;
    std::vector<double> classes;  // classification: ascending label values
    ModelPayload payload;

    std::size_t n_features() const { return feature_order.size(); }
    /// Training-row cluster labels (clustering families only).
    const std::vector<int>& train_labels() const {
        if (const auto* k = std::get_if<KmeansPayload>(&payload)) return k->train_labels;
        if (const auto* a = std::get_if<AggPayload>(&payload)) return a->train_labels;
        if (const auto* d = std::get_if<DbscanPayload>(&payload)) return d->train_labels;
        throw ModelError("train_labels is defined for clustering models only");
    }
};

// ---- fit ------------------------------------------------------------------------

inline FittedModel fit_model(const ModelSpec& spec, const Matrix& X,
                             const std::vector<double>* y,
                             const std::vector<std::string>& feature_order) {
    using detail::spec_double;
    using detail::spec_size;
    using detail::spec_string;
    if (X.rows == 0 || X.cols == 0) throw ModelError("cannot fit on an empty matrix");
    if (X.cols != feature_order.size())
        throw ModelError("feature-name count does not match the matrix width");
    const bool supervised = spec.task != Task::clustering;
    if (supervised && y == nullptr) throw ModelError("supervised fit requires targets");
    if (!supervised && y != nullptr) throw ModelError("clustering fit takes no targets");
    if (supervised && y->size() != X.rows) throw ModelError("row/target count mismatch");

    FittedModel m;
    m.spec = spec;
    m.feature_order = feature_order;
    if (spec.task == Task::classification) {
        std::vector<double> cls = *y;
        std::sort(cls.begin(), cls.end());
        cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
        if (cls.size() < 2) throw ModelError("classification requires at least two classes");
        m.classes = std::move(cls);
    }

    switch (spec.family) {
        case ModelFamily::SGDClassifier:
        case ModelFamily::SVM: {
            LinearPayload p;
            const bool svm = spec.family == ModelFamily::SVM;
            if (spec.task == Task::regression) {
                // Linear SVR: epsilon-insensitive subgradient descent.
                const double l2 = 1.0 / (spec_double(spec, "C") * static_cast<double>(X.rows));
                p.loss = "epsilon_insensitive";
                p.members.push_back(sgd_linear_fit(X, *y, SgdLoss::epsilon_insensitive, l2,
                                                   spec_size(spec, "epochs"), spec.seed,
                                                   spec_double(spec, "epsilon")));
            } else {
                const double l2 =
                    svm ? 1.0 / (spec_double(spec, "C") * static_cast<double>(X.rows))
                        : spec_double(spec, "l2");
                const SgdLoss loss =
                    svm ? SgdLoss::hinge : sgd_loss_from_string(spec_string(spec, "loss"));
                const double eta0 = svm ? 0.1 : spec_double(spec, "eta0");
                p.loss = to_string(loss);
                const std::size_t members = m.classes.size() == 2 ? 1 : m.classes.size();
                for (std::size_t c = 0; c < members; ++c) {
                    const double target = m.classes.size() == 2 ? m.classes[1] : m.classes[c];
                    std::vector<double> yb(y->size());
                    for (std::size_t i = 0; i < y->size(); ++i)
                        yb[i] = (*y)[i] == target ? 1.0 : 0.0;
                    p.members.push_back(sgd_linear_fit(X, yb, loss, l2,
                                                       spec_size(spec, "epochs"),
                                                       derive_seed(spec.seed, c), 0.1, eta0));
                }
            }
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::ElasticNet: {
            LinearPayload p;
            p.loss = "elastic_net";
            p.members.push_back(elastic_net_fit(X, *y, spec_double(spec, "alpha"),
                                                spec_double(spec, "l1_ratio"),
                                                spec_size(spec, "max_iter"),
                                                spec_double(spec, "tol")));
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::GradientBoosting: {
            GbParams gp{spec_size(spec, "n_estimators"), spec_double(spec, "learning_rate"),
                        spec_size(spec, "max_depth")};
            GbPayload p;
            p.model = spec.task == Task::regression
                          ? gradient_boosting_fit_regression(X, *y, gp)
                          : gradient_boosting_fit_classification(X, *y, m.classes, gp);
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::RandomForest: {
            ForestParams fp;
            fp.n_estimators = spec_size(spec, "n_estimators");
            const std::size_t depth = spec_size(spec, "max_depth");
            fp.max_depth = depth == 0 ? SIZE_MAX : depth;
            fp.bootstrap = detail::spec_bool(spec, "bootstrap");
            fp.classification = spec.task == Task::classification;
            const ParamValue& mf = detail::spec_param(spec, "max_features");
            if (std::get_if<std::string>(&mf)) {  // "auto"
                const double pd = static_cast<double>(X.cols);
                fp.max_features = fp.classification
                                      ? std::max<std::size_t>(
                                            1, static_cast<std::size_t>(std::sqrt(pd) + 0.5))
                                      : std::max<std::size_t>(
                                            1, static_cast<std::size_t>(pd / 3.0));
            } else {
                fp.max_features = spec_size(spec, "max_features");
            }
            ForestPayload p;
            p.model = random_forest_fit(X, *y, fp, spec.seed);
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::MLP: {
            MlpParams mp;
            mp.hidden = detail::parse_hidden(spec);
            mp.activation = spec_string(spec, "activation");
            mp.lr = spec_double(spec, "lr");
            mp.epochs = spec_size(spec, "epochs");
            mp.batch = spec_size(spec, "batch");
            MlpPayload p;
            p.model = mlp_fit(X, *y, m.classes, mp, spec.seed);
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::KNN: {
            KnnPayload p;
            p.model.X = X;
            p.model.y = *y;
            p.model.k = spec_size(spec, "k");
            p.model.classification = spec.task == Task::classification;
            m.payload = std::move(p);
            break;
        }
        case ModelFamily::KMeans: {
            const KmeansResult r =
                kmeans_fit(X, spec_size(spec, "n_clusters"), spec_size(spec, "n_init"),
                           spec_size(spec, "max_iter"), spec_double(spec, "tol"), spec.seed);
            m.payload = KmeansPayload{r.centroids, r.labels, r.inertia};
            break;
        }
        case ModelFamily::AggClustering: {
            const AggResult r = agglomerative_fit(
                X, spec_size(spec, "n_clusters"),
                linkage_from_string(spec_string(spec, "linkage")));
            m.payload = AggPayload{X, r.labels, r.merges};
            break;
        }
        case ModelFamily::DBSCAN: {
            const double eps = spec_double(spec, "eps");
            const DbscanResult r = dbscan_fit(X, eps, spec_size(spec, "min_samples"));
            m.payload = DbscanPayload{X, r.labels, r.core, eps};
            break;
        }
    }
    return m;
}

// ---- predict ---------------------------------------------------------------------

namespace detail {

inline void check_width(const FittedModel& m, const Matrix& X) {
    if (X.cols != m.n_features())
        throw ModelError("input has " + std::to_string(X.cols) + " columns, model expects " +
                         std::to_string(m.n_features()));
}

/// Per-class decision scores for a linear one-vs-rest payload.
inline std::vector<double> linear_scores(const LinearPayload& p, const double* x) {
    std::vector<double> s(p.members.size());
    for (std::size_t c = 0; c < p.members.size(); ++c) s[c] = linear_score(p.members[c], x);
    return s;
}

}  // namespace detail

/// Single-row prediction (class value, regression value, or cluster id).
inline double predict_value_row(const FittedModel& m, const double* x) {
    if (const auto* lp = std::get_if<LinearPayload>(&m.payload)) {
        if (m.spec.task == Task::regression) return linear_score(lp->members[0], x);
        if (m.classes.size() == 2) {
            const double s = linear_score(lp->members[0], x);
            return s > 0.0 ? m.classes[1] : m.classes[0];
        }
        const std::vector<double> s = detail::linear_scores(*lp, x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < s.size(); ++c)
            if (s[c] > s[best]) best = c;  // tie -> lowest class index
        return m.classes[best];
    }
    if (const auto* gp = std::get_if<GbPayload>(&m.payload)) {
        if (m.spec.task == Task::regression) return gb_predict_value(gp->model, x);
        const std::vector<double> p = gb_predict_proba_row(gp->model, x, m.classes.size());
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.size(); ++c)
            if (p[c] > p[best]) best = c;
        return m.classes[best];
    }
    if (const auto* fp = std::get_if<ForestPayload>(&m.payload))
        return forest_predict_row(fp->model, x);
    if (const auto* mp = std::get_if<MlpPayload>(&m.payload)) {
        const std::vector<double> o = mlp_forward_row(mp->model, x);
        if (m.spec.task == Task::regression) return o[0];
        std::size_t best = 0;
        for (std::size_t c = 1; c < o.size(); ++c)
            if (o[c] > o[best]) best = c;
        return m.classes[best];
    }
    if (const auto* kp = std::get_if<KnnPayload>(&m.payload)) return knn_predict_row(kp->model, x);
    if (const auto* km = std::get_if<KmeansPayload>(&m.payload))
        return static_cast<double>(detail::nearest_centroid(km->centroids, x));
    if (const auto* ap = std::get_if<AggPayload>(&m.payload)) {
        // 1-NN assignment to the training points (ties -> lowest index).
        std::size_t best = 0;
        double bd = squared_distance(ap->X.row_ptr(0), x, ap->X.cols);
        for (std::size_t r = 1; r < ap->X.rows; ++r) {
            const double d = squared_distance(ap->X.row_ptr(r), x, ap->X.cols);
            if (d < bd) {
                bd = d;
                best = r;
            }
        }
        return static_cast<double>(ap->train_labels[best]);
    }
    const auto& dp = std::get<DbscanPayload>(m.payload);
    DbscanResult fitview;
    fitview.labels = dp.train_labels;
    fitview.core = dp.core;
    return static_cast<double>(dbscan_predict_row(dp.X, fitview, dp.eps, x));
}

inline std::vector<double> predict_model(const FittedModel& m, const Matrix& X) {
    detail::check_width(m, X);
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict_value_row(m, X.row_ptr(i));
    return out;
}

/// Single-row class probabilities aligned with m.classes; std::nullopt for
/// hinge-loss linear models.  Classification models only.
inline std::optional<std::vector<double>> proba_row(const FittedModel& m, const double* x) {
    if (m.spec.task != Task::classification)
        throw ModelError("class probabilities are defined for classification models only");
    const std::size_t k = m.classes.size();
    if (const auto* lp = std::get_if<LinearPayload>(&m.payload)) {
        if (lp->loss == "hinge") return std::nullopt;
        std::vector<double> p(k);
        if (k == 2 && lp->members.size() == 1) {
            p[1] = sigmoid(linear_score(lp->members[0], x));
            p[0] = 1.0 - p[1];
            return p;
        }
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            p[c] = sigmoid(linear_score(lp->members[c], x));
            total += p[c];
        }
        if (total == 0.0)
            std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
        else
            for (double& v : p) v /= total;
        return p;
    }
    if (const auto* gp = std::get_if<GbPayload>(&m.payload))
        return gb_predict_proba_row(gp->model, x, k);
    if (const auto* fp = std::get_if<ForestPayload>(&m.payload))
        return forest_vote_fractions(fp->model, x, m.classes);
    if (const auto* mp = std::get_if<MlpPayload>(&m.payload)) return mlp_forward_row(mp->model, x);
    if (const auto* kp = std::get_if<KnnPayload>(&m.payload))
        return knn_vote_fractions(kp->model, x, m.classes);
    return std::nullopt;
}

/// Class probabilities aligned with m.classes; std::nullopt when the family
/// genuinely has none (hinge-loss linear models).  Throws for non-classifiers.
inline std::optional<Matrix> predict_proba_model(const FittedModel& m, const Matrix& X) {
    if (m.spec.task != Task::classification)
        throw ModelError("class probabilities are defined for classification models only");
    detail::check_width(m, X);
    Matrix P(X.rows, m.classes.size());
    for (std::size_t i = 0; i < X.rows; ++i) {
        const std::optional<std::vector<double>> p = proba_row(m, X.row_ptr(i));
        if (!p) return std::nullopt;
        std::copy(p->begin(), p->end(), P.row_ptr(i));
    }
    return P;
}

/// Non-negative per-feature importance: |w| (linear; multiclass column L2)
/// or normalized impurity decrease (tree ensembles).  std::nullopt otherwise.
inline std::optional<std::vector<double>> feature_weights_model(const FittedModel& m) {
    if (const auto* lp = std::get_if<LinearPayload>(&m.payload)) {
        const std::size_t p = lp->members[0].w.size();
        std::vector<double> w(p, 0.0);
        if (lp->members.size() == 1) {
            for (std::size_t j = 0; j < p; ++j) w[j] = std::abs(lp->members[0].w[j]);
        } else {
            for (std::size_t j = 0; j < p; ++j) {
                double s = 0.0;
                for (const LinearModel& mem : lp->members) s += mem.w[j] * mem.w[j];
                w[j] = std::sqrt(s);
            }
        }
        return w;
    }
    if (const auto* gp = std::get_if<GbPayload>(&m.payload)) return gp->model.importance;
    if (const auto* fp = std::get_if<ForestPayload>(&m.payload)) return fp->model.importance;
    return std::nullopt;
}

// ---- serialization -----------------------------------------------------------------

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
    Json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    Json data = Json::array();
    for (double v : m.data) data.push_back(format_g17(v));
    j["data"] = std::move(data);
    return j;
}

inline Matrix matrix_from_json(const Json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const Json& data = j.at("data");
    if (data.size() != m.data.size()) throw ConfigError("corrupted matrix payload");
    for (std::size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = parse_g17(data[i].get<std::string>());
    return m;
}

inline Json doubles_to_json(const std::vector<double>& v) {
    Json j = Json::array();
    for (double x : v) j.push_back(format_g17(x));
    return j;
}

inline std::vector<double> doubles_from_json(const Json& j) {
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(parse_g17(x.get<std::string>()));
    return v;
}

inline Json tree_to_json(const Tree& t) {
    Json nodes = Json::array();
    for (const TreeNode& n : t.nodes)
        nodes.push_back(Json{{"feature", n.feature},
                             {"threshold", format_g17(n.threshold)},
                             {"left", n.left},
                             {"right", n.right},
                             {"value", format_g17(n.value)}});
    return Json{{"n_features", t.n_features}, {"nodes", std::move(nodes)}};
}

inline Tree tree_from_json(const Json& j) {
    Tree t;
    t.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& nj : j.at("nodes")) {
        TreeNode n;
        n.feature = nj.at("feature").get<int>();
        n.threshold = parse_g17(nj.at("threshold").get<std::string>());
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.value = parse_g17(nj.at("value").get<std::string>());
        t.nodes.push_back(n);
    }
    return t;
}

inline Json param_value_to_json(const ParamValue& v) {
    if (const double* d = std::get_if<double>(&v)) return Json(*d);
    if (const std::string* s = std::get_if<std::string>(&v)) return Json(*s);
    return Json(std::get<bool>(v));
}

inline ParamValue param_value_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    throw ConfigError("parameter values must be scalars");
}

}  // namespace detail

inline Json to_json(const ModelSpec& s) {
    Json params = Json::object();
    for (const auto& [name, value] : s.params)
        params[name] = detail::param_value_to_json(value);
    return Json{{"family", to_string(s.family)},
                {"task", to_string(s.task)},
                {"params", std::move(params)},
                {"seed", s.seed}};
}

inline ModelSpec model_spec_from_json(const Json& j) {
    ModelSpec s;
    const std::string fam = j.at("family").get<std::string>();
    const auto& names = model_family_names();
    const auto it = std::find(names.begin(), names.end(), fam);
    if (it == names.end()) throw ConfigError("unknown model family '" + fam + "'");
    s.family = static_cast<ModelFamily>(it - names.begin());
    s.task = task_from_string(j.at("task").get<std::string>());
    for (const auto& [name, value] : j.at("params").items())
        s.params[name] = detail::param_value_from_json(value);
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

inline Json to_json(const FittedModel& m) {
    Json j;
    j["spec"] = to_json(m.spec);
    j["feature_order"] = m.feature_order;
    j["classes"] = detail::doubles_to_json(m.classes);
    Json p;
    if (const auto* lp = std::get_if<LinearPayload>(&m.payload)) {
        p["kind"] = "linear";
        p["loss"] = lp->loss;
        Json members = Json::array();
        for (const LinearModel& mem : lp->members)
            members.push_back(
                Json{{"w", detail::doubles_to_json(mem.w)}, {"b", format_g17(mem.b)}});
        p["members"] = std::move(members);
    } else if (const auto* gp = std::get_if<GbPayload>(&m.payload)) {
        p["kind"] = "gb";
        p["learning_rate"] = format_g17(gp->model.learning_rate);
        p["classification"] = gp->model.classification;
        p["importance"] = detail::doubles_to_json(gp->model.importance);
        Json chains = Json::array();
        for (const GbChain& c : gp->model.chains) {
            Json trees = Json::array();
            for (const Tree& t : c.trees) trees.push_back(detail::tree_to_json(t));
            chains.push_back(Json{{"f0", format_g17(c.f0)}, {"trees", std::move(trees)}});
        }
        p["chains"] = std::move(chains);
    } else if (const auto* fp = std::get_if<ForestPayload>(&m.payload)) {
        p["kind"] = "forest";
        p["classification"] = fp->model.classification;
        p["importance"] = detail::doubles_to_json(fp->model.importance);
        Json trees = Json::array();
        for (const Tree& t : fp->model.trees) trees.push_back(detail::tree_to_json(t));
        p["trees"] = std::move(trees);
    } else if (const auto* mp = std::get_if<MlpPayload>(&m.payload)) {
        p["kind"] = "mlp";
        p["activation"] = mp->model.activation;
        p["classification"] = mp->model.classification;
        Json layers = Json::array();
        for (std::size_t l = 0; l < mp->model.W.size(); ++l)
            layers.push_back(Json{{"W", detail::matrix_to_json(mp->model.W[l])},
                                  {"b", detail::doubles_to_json(mp->model.b[l])}});
        p["layers"] = std::move(layers);
    } else if (const auto* kp = std::get_if<KnnPayload>(&m.payload)) {
        p["kind"] = "knn";
        p["k"] = kp->model.k;
        p["classification"] = kp->model.classification;
        p["X"] = detail::matrix_to_json(kp->model.X);
        p["y"] = detail::doubles_to_json(kp->model.y);
    } else if (const auto* km = std::get_if<KmeansPayload>(&m.payload)) {
        p["kind"] = "kmeans";
        p["centroids"] = detail::matrix_to_json(km->centroids);
        p["train_labels"] = km->train_labels;
        p["inertia"] = format_g17(km->inertia);
    } else if (const auto* ap = std::get_if<AggPayload>(&m.payload)) {
        p["kind"] = "agg";
        p["X"] = detail::matrix_to_json(ap->X);
        p["train_labels"] = ap->train_labels;
        Json merges = Json::array();
        for (const auto& [a, b] : ap->merges) merges.push_back(Json::array({a, b}));
        p["merges"] = std::move(merges);
    } else if (const auto* dp = std::get_if<DbscanPayload>(&m.payload)) {
        p["kind"] = "dbscan";
        p["X"] = detail::matrix_to_json(dp->X);
        p["train_labels"] = dp->train_labels;
        Json core = Json::array();
        for (bool b : dp->core) core.push_back(b);
        p["core"] = std::move(core);
        p["eps"] = format_g17(dp->eps);
    }
    j["payload"] = std::move(p);
    return j;
}

inline FittedModel fitted_model_from_json(const Json& j) {
    FittedModel m;
    m.spec = model_spec_from_json(j.at("spec"));
    m.feature_order = j.at("feature_order").get<std::vector<std::string>>();
    m.classes = detail::doubles_from_json(j.at("classes"));
    const Json& p = j.at("payload");
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "linear") {
        LinearPayload lp;
        lp.loss = p.at("loss").get<std::string>();
        for (const auto& mj : p.at("members")) {
            LinearModel mem;
            mem.w = detail::doubles_from_json(mj.at("w"));
            mem.b = parse_g17(mj.at("b").get<std::string>());
            lp.members.push_back(std::move(mem));
        }
        m.payload = std::move(lp);
    } else if (kind == "gb") {
        GbPayload gp;
        gp.model.learning_rate = parse_g17(p.at("learning_rate").get<std::string>());
        gp.model.classification = p.at("classification").get<bool>();
        gp.model.importance = detail::doubles_from_json(p.at("importance"));
        for (const auto& cj : p.at("chains")) {
            GbChain c;
            c.f0 = parse_g17(cj.at("f0").get<std::string>());
            for (const auto& tj : cj.at("trees")) c.trees.push_back(detail::tree_from_json(tj));
            gp.model.chains.push_back(std::move(c));
        }
        m.payload = std::move(gp);
    } else if (kind == "forest") {
        ForestPayload fp;
        fp.model.classification = p.at("classification").get<bool>();
        fp.model.importance = detail::doubles_from_json(p.at("importance"));
        for (const auto& tj : p.at("trees")) fp.model.trees.push_back(detail::tree_from_json(tj));
        m.payload = std::move(fp);
    } else if (kind == "mlp") {
        MlpPayload mp;
        mp.model.activation = p.at("activation").get<std::string>();
        mp.model.classification = p.at("classification").get<bool>();
        for (const auto& lj : p.at("layers")) {
            mp.model.W.push_back(detail::matrix_from_json(lj.at("W")));
            mp.model.b.push_back(detail::doubles_from_json(lj.at("b")));
        }
        m.payload = std::move(mp);
    } else if (kind == "knn") {
        KnnPayload kp;
        kp.model.k = p.at("k").get<std::size_t>();
        kp.model.classification = p.at("classification").get<bool>();
        kp.model.X = detail::matrix_from_json(p.at("X"));
        kp.model.y = detail::doubles_from_json(p.at("y"));
        m.payload = std::move(kp);
    } else if (kind == "kmeans") {
        KmeansPayload km;
        km.centroids = detail::matrix_from_json(p.at("centroids"));
        km.train_labels = p.at("train_labels").get<std::vector<int>>();
        km.inertia = parse_g17(p.at("inertia").get<std::string>());
        m.payload = std::move(km);
    } else if (kind == "agg") {
        AggPayload ap;
        ap.X = detail::matrix_from_json(p.at("X"));
        ap.train_labels = p.at("train_labels").get<std::vector<int>>();
        for (const auto& mj : p.at("merges"))
            ap.merges.emplace_back(mj[0].get<int>(), mj[1].get<int>());
        m.payload = std::move(ap);
    } else if (kind == "dbscan") {
        DbscanPayload dp;
        dp.X = detail::matrix_from_json(p.at("X"));
        dp.train_labels = p.at("train_labels").get<std::vector<int>>();
        for (const auto& bj : p.at("core")) dp.core.push_back(bj.get<bool>());
        dp.eps = parse_g17(p.at("eps").get<std::string>());
        m.payload = std::move(dp);
    } else {
        throw ConfigError("unknown model payload kind '" + kind + "'");
    }
    return m;
}

}  // namespace riskpipe

// End-to-end runs through the engine and the command-line binary: documented
// result shapes, per-family persistence round trips, bundle resolution, and
// the train/test leakage audit.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "riskpipe/bundle.hpp"
#include "riskpipe/engine.hpp"

using namespace riskpipe;

namespace {

std::string fixture(const std::string& name) {
    return std::string(RISKPIPE_FIXTURE_DIR) + "/" + name;
}

std::vector<std::string> key_list(const Json& obj) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : obj.items()) keys.push_back(k);
    return keys;
}

std::string data_config_json(std::uint64_t run_id, const std::string& phase,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& categorical,
                             const std::vector<std::string>& drop, int split_pct,
                             std::uint64_t seed, const std::string& group = "") {
    Json j;
    j["services"] = {{"log_prefix", "run"}};
    j["runtime"] = {{"run_id", run_id}};
    j["dataset"] = {{"name", "t"}, {"type", "point-in-time"}, {"format", "csv"}};
    j["group"] = group;
    j["PatientID"] = "Sample";
    j["labels"] = labels;
    j["time"] = "";
    j["features2drop"] = drop;
    j["phase"] = phase;
    j["categorical_features"] = categorical;
    if (phase == "training_predict") j["split_percentage"] = split_pct;
    j["split_type"] = "random";
    j["seed"] = seed;
    return j.dump();
}

std::string algo_config_json(const std::string& type, const std::string& family,
                             const Json& family_params, const std::string& description,
                             const Json& extra_blocks = Json::object()) {
    Json p;
    p["preprocessing"] = {{"standardization_feature", true}};
    p["data_inputation"] = {{"perc_nan_to_drop", 0.5},
                            {"categorical", "most_frequent"},
                            {"not_categorical", "mean"}};
    for (const auto& [k, v] : extra_blocks.items()) p[k] = v;
    p[family] = family_params;
    Json j;
    j["algorithm"] = {{"phase", "training"},
                      {"config_name", family},
                      {"description", description},
                      {"type", type},
                      {"parameters", p}};
    return j.dump();
}

// Small typed table the leakage audit can patch cell by cell.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < header.size(); ++c)
            out += (c ? "," : "") + header[c];
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
            out += "\n";
        }
        return out;
    }
};

Table cls_table(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Table t;
    t.header = {"Sample", "Type", "C", "x1", "x2"};
    for (std::size_t r = 0; r < n; ++r) {
        const bool b = r % 2 == 1;
        std::vector<std::string> row(5);
        row[0] = std::to_string(r + 1);
        row[1] = b ? "b" : "a";
        row[2] = rng.uniform01() < 0.5 ? "red" : "blue";
        row[3] = r == 2 ? "" : format_g17((b ? 3.0 : 0.0) + 0.6 * testutil::gauss(rng));
        row[4] = format_g17((b ? 3.0 : 0.0) + 0.6 * testutil::gauss(rng));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string reg_csv(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::string out = "Sample,y,x1,x2\n";
    for (std::size_t r = 0; r < n; ++r) {
        const double x1 = testutil::gauss(rng);
        const double x2 = testutil::gauss(rng);
        const double y = 3.0 + 2.0 * x1 - 0.5 * x2 + 0.05 * testutil::gauss(rng);
        out += std::to_string(r + 1) + "," + format_g17(y) + "," + format_g17(x1) + "," +
               format_g17(x2) + "\n";
    }
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RISKPIPE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("clustering fixtures drive training and prediction to the documented shapes",
          "[engine][e2e]") {
    namespace fs = std::filesystem;
    const std::string dir = testutil::scratch_dir("e2e_cluster");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, testutil::e2e_csv(40, 5));

    const DataConfig dc =
        parse_data_config(testutil::read_text(fixture("sample_data_config.json")));
    const AlgoConfig ac =
        parse_algo_config(testutil::read_text(fixture("sample_algo_config.json")));
    const RunArtifacts art = run_training(dc, ac, csv, dir, false);

    CHECK(fs::exists(art.results_path));
    CHECK(fs::exists(art.bundle_path));
    CHECK(fs::exists(art.log_path));
    CHECK(fs::path(art.results_path).filename() == "log_781_training.json");
    CHECK(fs::path(art.bundle_path).filename() == "log_781_model.json");

    SECTION("training result shape") {
        const Json& r = art.results;
        CHECK(key_list(r) ==
              std::vector<std::string>{"config_data", "description", "testing_set"});
        CHECK(key_list(r.at("config_data")) == std::vector<std::string>{"metrics_training"});
        CHECK(key_list(r.at("config_data").at("metrics_training")) ==
              std::vector<std::string>{"Type"});
        const Json& block = r.at("config_data").at("metrics_training").at("Type");
        CHECK(key_list(block) ==
              std::vector<std::string>{"ARI", "AMI", "v-score", "Silhouette"});
        for (const auto& [k, v] : block.items()) {
            CHECK(v.is_number());
            CHECK(v.get<double>() <= 1.0 + 1e-12);
        }
        CHECK(r.at("description") == "AggClustering");
        const Json& test_block = r.at("testing_set").at("Type");
        const std::vector<std::string> tk = key_list(test_block);
        REQUIRE(tk.size() >= 4);
        CHECK(std::vector<std::string>(tk.begin(), tk.begin() + 4) ==
              std::vector<std::string>{"ARI", "AMI", "v-score", "Silhouette"});
        // The written file holds exactly the returned document.
        CHECK(testutil::read_text(art.results_path) == r.dump(1) + "\n");
    }

    SECTION("prediction against the stored bundle") {
        const std::string pdir = testutil::scratch_dir("e2e_cluster_pred");
        const PredictConfig pc =
            parse_predict_config(testutil::read_text(fixture("sample_predict_config.json")));
        const RunArtifacts part = run_predict_pretrained(pc, csv, dir, pdir, false);

        CHECK(key_list(part.results) == std::vector<std::string>{"testing_set"});
        const Json& block = part.results.at("testing_set").at("Type");
        const std::vector<std::string> keys = key_list(block);
        REQUIRE(keys.size() >= 4);
        CHECK(std::vector<std::string>(keys.begin(), keys.begin() + 4) ==
              std::vector<std::string>{"ARI", "AMI", "v-score", "Silhouette"});

        REQUIRE(fs::exists(part.predictions_path));
        CHECK(fs::path(part.predictions_path).filename() == "log_781_predictions.csv");
        const std::string text = testutil::read_text(part.predictions_path);
        CHECK(std::count(text.begin(), text.end(), '\n') == 41);  // header + 40 rows
        CHECK(text.rfind("Sample,prediction\n", 0) == 0);
        CHECK(fs::path(part.results_path).filename() == "log_781_predict.json");
    }
}

TEST_CASE("training-only phase omits the testing block", "[engine]") {
    const std::string dir = testutil::scratch_dir("e2e_training_only");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, testutil::e2e_csv(30, 8));

    std::string doc = testutil::read_text(fixture("sample_data_config.json"));
    const std::size_t at = doc.find("training_predict");
    REQUIRE(at != std::string::npos);
    doc.replace(at, std::string("training_predict").size(), "training");
    const DataConfig dc = parse_data_config(doc);
    const AlgoConfig ac =
        parse_algo_config(testutil::read_text(fixture("sample_algo_config.json")));
    const RunArtifacts art = run_training(dc, ac, csv, dir, false);
    CHECK(key_list(art.results) == std::vector<std::string>{"config_data", "description"});
}

TEST_CASE("supervised classification run: importance, elimination and attributions",
          "[engine][e2e]") {
    const std::string dir = testutil::scratch_dir("e2e_supervised");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, testutil::e2e_csv(40, 12));

    const DataConfig dc = parse_data_config(
        data_config_json(3, "training_predict", {"Type"}, {"C", "D"}, {"A", "B"}, 75, 9));
    Json extra;
    extra["rfe"] = {{"enabled", true}, {"n_features_to_select", 3}};
    extra["shap"] = {{"enabled", true}, {"mode", "auto"}};
    const AlgoConfig ac = parse_algo_config(algo_config_json(
        "classification", "SGDClassifier", {{"loss", "log"}, {"epochs", 40.0}}, "sgd-e2e",
        extra));
    const RunArtifacts art = run_training(dc, ac, csv, dir, false);
    const Json& r = art.results;

    CHECK(key_list(r) == std::vector<std::string>{"config_data", "description", "testing_set",
                                                  "feature_importance", "rfe", "shap",
                                                  "shap_values"});
    const Json& tr = r.at("config_data").at("metrics_training").at("Type");
    for (const char* k : {"accuracy", "precision", "recall", "f1", "hss", "mcc",
                          "cross_entropy"})
        CHECK(tr.contains(k));
    CHECK_FALSE(tr.contains("positive_class"));  // three classes
    CHECK(r.at("testing_set").contains("Type"));

    // Elimination kept three of the eight encoded columns and importance is
    // reported for exactly the surviving ones.
    CHECK(r.at("rfe").at("retained").size() == 3);
    CHECK(r.at("feature_importance").size() == 3);
    for (const auto& [name, w] : r.at("feature_importance").items())
        CHECK(w.get<double>() >= 0.0);

    // Attribution block: exact mode (3 features), one matrix per class.
    CHECK(r.at("shap").at("mode") == "exact");
    REQUIRE(r.at("shap").at("class_values").size() == 3);
    CHECK(r.at("shap").at("feature_names").size() == 3);
    const Json& sv = r.at("shap_values");
    CHECK(sv.size() == std::min<std::size_t>(100, 30));
    REQUIRE(sv[0].size() == 3);
    REQUIRE(sv[0][0].size() == 3);

    SECTION("hinge loss drops probability metrics") {
        const std::string dir2 = testutil::scratch_dir("e2e_hinge");
        const AlgoConfig hinge = parse_algo_config(algo_config_json(
            "classification", "SGDClassifier", {{"loss", "hinge"}, {"epochs", 40.0}},
            "hinge-e2e"));
        const DataConfig dc2 = parse_data_config(
            data_config_json(4, "training", {"Type"}, {"C", "D"}, {"A", "B"}, 0, 9));
        const RunArtifacts art2 = run_training(dc2, hinge, csv, dir2, false);
        CHECK_FALSE(art2.results.at("config_data").at("metrics_training").at("Type")
                        .contains("cross_entropy"));
    }
}

TEST_CASE("parameter grids produce a cross-validation report", "[engine]") {
    const std::string dir = testutil::scratch_dir("e2e_grid");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, testutil::e2e_csv(36, 21));

    const DataConfig dc = parse_data_config(
        data_config_json(6, "training", {"Type"}, {"C", "D"}, {"A", "B"}, 0, 2));
    Json extra;
    extra["cv_folds"] = 3;
    const AlgoConfig ac = parse_algo_config(algo_config_json(
        "classification", "KNN", {{"k", Json::array({1.0, 3.0, 5.0})}}, "knn-grid", extra));
    const RunArtifacts art = run_training(dc, ac, csv, dir, false);

    REQUIRE(art.results.contains("cv_report"));
    const Json& cv = art.results.at("cv_report");
    CHECK(cv.at("scoring") == "accuracy");  // three classes
    REQUIRE(cv.at("grid_points").size() == 3);
    for (const Json& p : cv.at("grid_points")) {
        CHECK(p.at("fold_scores").size() == 3);
        CHECK(key_list(p.at("params")) == std::vector<std::string>{"k"});
    }
    CHECK(cv.at("best_params").contains("k"));

    // The bundle echoes the resolved winning parameters, not the grid.
    const ModelBundle bundle = load_bundle(art.bundle_path);
    const Json& echoed =
        bundle.algo_config.at("algorithm").at("parameters").at("KNN").at("k");
    CHECK_FALSE(echoed.is_array());
    CHECK(bundle.cv_report.has_value());

    SECTION("a grid on a clustering task is rejected up front") {
        const AlgoConfig bad = parse_algo_config(algo_config_json(
            "clustering", "KMeans",
            {{"n_clusters", Json::array({2.0, 3.0})}, {"n_init", 2.0}}, "km-grid"));
        const DataConfig dc2 = parse_data_config(
            data_config_json(7, "training", {"Type"}, {"C", "D"}, {"A", "B"}, 0, 2));
        CHECK_THROWS_AS(run_training(dc2, bad, csv, testutil::scratch_dir("e2e_grid_bad"),
                                     false),
                        ConfigError);
    }
}

TEST_CASE("regression run reports raw-unit metrics and attributions", "[engine][e2e]") {
    const std::string dir = testutil::scratch_dir("e2e_regression");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, reg_csv(30, 33));

    const DataConfig dc = parse_data_config(
        data_config_json(9, "training_predict", {"y"}, {}, {}, 80, 3));
    Json extra;
    extra["shap"] = {{"enabled", true}, {"mode", "exact"}};
    Json algo = parse_json_text(algo_config_json(
        "regression", "ElasticNet", {{"alpha", 0.001}}, "enet-e2e", extra));
    algo["algorithm"]["parameters"]["preprocessing"] = {{"standardization_feature", true},
                                                        {"standardization_label", true}};
    const AlgoConfig ac = parse_algo_config(algo.dump());
    const RunArtifacts art = run_training(dc, ac, csv, dir, false);

    // Metrics are in raw target units even though the label was standardized
    // for fitting: near-noiseless linear data keeps rmse tiny relative to the
    // target spread (which is ~2, far above 1 after de-standardization).
    const Json& m = art.results.at("config_data").at("metrics_training").at("y");
    CHECK(key_list(m) == std::vector<std::string>{"mse", "rmse", "mae", "r2"});
    CHECK(m.at("r2").get<double>() > 0.95);
    CHECK(m.at("rmse").get<double>() < 0.2);
    CHECK(art.results.at("testing_set").at("y").at("r2").get<double>() > 0.9);

    // Local accuracy in raw units: base + sum(phi) reproduces the raw-unit
    // prediction for the first explained row.
    const ModelBundle bundle = load_bundle(art.bundle_path);
    const TabularDataset ds = read_predict_data(csv, bundle.schemas);
    const EncodedDataset enc = apply_preprocess(bundle.preprocess, ds);
    const Json& shap = art.results.at("shap");
    const std::size_t row = shap.at("rows")[0].get<std::size_t>();
    Matrix one(1, enc.features.cols);
    for (std::size_t c = 0; c < enc.features.cols; ++c) one(0, c) = enc.features(row, c);
    const double raw_pred =
        invert_label_transform(bundle.preprocess, predict_model(bundle.model, one)).front();
    double total = shap.at("base_value").get<double>();
    for (const Json& v : art.results.at("shap_values")[0]) total += v.get<double>();
    CHECK(total == Catch::Approx(raw_pred).margin(1e-8));
}

TEST_CASE("every family survives the save/load round trip bit-exactly",
          "[engine][persistence]") {
    const std::string dir = testutil::scratch_dir("persist");
    const testutil::Blobs blobs = testutil::make_blobs({{0, 0}, {4, 4}}, 8, 0.6, 44);
    const testutil::RegData reg = testutil::make_regression(16, {2.0, -1.0}, 0.1, 45);
    const std::vector<std::string> names = {"p", "q"};

    struct Case {
        ModelFamily family;
        Task task;
        std::vector<std::pair<std::string, ParamValue>> params;
    };
    const std::vector<Case> cases = {
        {ModelFamily::SGDClassifier, Task::classification,
         {{"loss", std::string("log")}, {"epochs", 30.0}}},
        {ModelFamily::ElasticNet, Task::regression, {{"alpha", 0.05}}},
        {ModelFamily::GradientBoosting, Task::classification, {{"n_estimators", 10.0}}},
        {ModelFamily::RandomForest, Task::classification, {{"n_estimators", 10.0}}},
        {ModelFamily::MLP, Task::classification,
         {{"hidden", std::string("6")}, {"epochs", 25.0}}},
        {ModelFamily::SVM, Task::classification, {{"epochs", 30.0}}},
        {ModelFamily::KNN, Task::classification, {{"k", 3.0}}},
        {ModelFamily::KMeans, Task::clustering, {{"n_clusters", 2.0}, {"n_init", 2.0}}},
        {ModelFamily::AggClustering, Task::clustering,
         {{"n_clusters", 2.0}, {"linkage", std::string("average")}}},
        {ModelFamily::DBSCAN, Task::clustering, {{"eps", 1.5}, {"min_samples", 3.0}}},
    };

    std::size_t idx = 0;
    for (const Case& c : cases) {
        INFO(to_string(c.family));
        const bool regression = c.task == Task::regression;
        const Matrix& X = regression ? reg.X : blobs.X;
        const std::vector<double>* y =
            c.task == Task::clustering ? nullptr : (regression ? &reg.y : &blobs.y);
        const FittedModel fitted =
            fit_model(resolve_spec(c.family, c.task, c.params, 7), X, y, names);

        ModelBundle b;
        b.description = to_string(c.family);
        b.model = fitted;
        const std::string path = save_bundle(b, dir, "fam", ++idx);
        const ModelBundle loaded = load_bundle(path);

        const std::vector<double> before = predict_model(fitted, X);
        const std::vector<double> after = predict_model(loaded.model, X);
        REQUIRE(before.size() == after.size());
        for (std::size_t i = 0; i < before.size(); ++i)
            CHECK(testutil::bits_equal(before[i], after[i]));

        if (c.task == Task::classification) {
            const std::optional<Matrix> pb = predict_proba_model(fitted, X);
            const std::optional<Matrix> pa = predict_proba_model(loaded.model, X);
            REQUIRE(pb.has_value() == pa.has_value());
            if (pb)
                for (std::size_t i = 0; i < pb->data.size(); ++i)
                    CHECK(testutil::bits_equal(pb->data[i], pa->data[i]));
        }

        // save -> load -> save is byte-identical.
        CHECK(bundle_text(loaded) == testutil::read_text(path));
    }
}

TEST_CASE("bundle resolution prefers the newest run and names what exists",
          "[engine][bundle]") {
    const std::string dir = testutil::scratch_dir("resolve");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, cls_table(20, 3).csv());

    const AlgoConfig ac = parse_algo_config(
        algo_config_json("classification", "KNN", {{"k", 3.0}}, "resolver-check"));
    for (const std::uint64_t run : {2ull, 9ull}) {
        const DataConfig dc = parse_data_config(
            data_config_json(run, "training", {"Type"}, {"C"}, {}, 0, run));
        run_training(dc, ac, csv, dir, false);
    }
    const std::string chosen = resolve_bundle(dir, "resolver-check");
    CHECK(std::filesystem::path(chosen).filename() == "run_9_model.json");

    try {
        resolve_bundle(dir, "no-such-model");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("resolver-check") != std::string::npos);
    }
}

TEST_CASE("prediction without labels yields files but empty results", "[engine]") {
    const std::string dir = testutil::scratch_dir("pred_nolabel");
    const std::string csv = dir + "/train.csv";
    testutil::write_text(csv, cls_table(20, 6).csv());
    const DataConfig dc =
        parse_data_config(data_config_json(1, "training", {"Type"}, {"C"}, {}, 0, 4));
    const AlgoConfig ac = parse_algo_config(
        algo_config_json("classification", "KNN", {{"k", 3.0}}, "nolabel-check"));
    run_training(dc, ac, csv, dir, false);

    // New data with the label column removed entirely.
    Table fresh = cls_table(10, 7);
    Table unlabeled;
    unlabeled.header = {"Sample", "C", "x1", "x2"};
    for (const auto& row : fresh.rows)
        unlabeled.rows.push_back({row[0], row[2], row[3], row[4]});
    const std::string pcsv = dir + "/new.csv";
    testutil::write_text(pcsv, unlabeled.csv());

    Json pc_doc;
    pc_doc["services"] = {{"log_prefix", "pred"}};
    pc_doc["runtime"] = {{"run_id", 5}};
    pc_doc["dataset"] = {{"name", "t"}, {"type", "point-in-time"}, {"format", "csv"}};
    pc_doc["description"] = "nolabel-check";
    const PredictConfig pc = parse_predict_config(pc_doc.dump());
    const RunArtifacts art = run_predict_pretrained(pc, pcsv, dir, dir, false);

    CHECK(art.results == Json::object());
    CHECK(testutil::read_text(art.results_path) == "{}\n");
    REQUIRE(std::filesystem::exists(art.predictions_path));
    const std::string text = testutil::read_text(art.predictions_path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
    // Classification predictions are written as category text.
    const std::string second_line = text.substr(text.find('\n') + 1);
    const std::string pred_token = second_line.substr(second_line.find(',') + 1,
                                                      second_line.find('\n') -
                                                          second_line.find(',') - 1);
    CHECK((pred_token == "a" || pred_token == "b"));

    SECTION("empty prediction data is rejected") {
        const std::string ecsv = dir + "/empty.csv";
        testutil::write_text(ecsv, "Sample,C,x1,x2\n");
        CHECK_THROWS_AS(run_predict_pretrained(pc, ecsv, dir, dir, false), DataError);
    }
}

TEST_CASE("perturbing test rows leaves the fitted state byte-identical",
          "[engine][leakage]") {
    const std::string dir = testutil::scratch_dir("leakage");
    const Table base = cls_table(24, 13);
    const std::string base_csv = dir + "/base.csv";
    testutil::write_text(base_csv, base.csv());

    const DataConfig dc = parse_data_config(
        data_config_json(1, "training_predict", {"Type"}, {"C"}, {}, 75, 11));
    const AlgoConfig ac = parse_algo_config(algo_config_json(
        "classification", "SGDClassifier", {{"loss", "log"}, {"epochs", 25.0}}, "leak"));

    // Replicate the engine's split to learn which rows are test rows; the
    // library is deterministic, so membership depends only on seed and size.
    const TabularDataset split = split_dataset(read_csv_dataset(base_csv, dc), dc);
    REQUIRE(split.test_rows.size() == 6);
    const std::vector<std::size_t> test_rows(split.test_rows.begin(), split.test_rows.end());

    const auto fitted_state = [&](const std::string& csv_path, const std::string& out) {
        const RunArtifacts art = run_training(dc, ac, csv_path, out, false);
        const Json b = parse_json_text(testutil::read_text(art.bundle_path));
        return std::pair<std::string, std::string>(
            b.at("preprocess").dump() + b.at("column_schemas").dump(), b.at("model").dump());
    };
    const auto baseline = fitted_state(base_csv, dir + "/out_base");

    struct Perturbation {
        const char* name;
        std::size_t row_of_test;  // index into test_rows
        std::size_t column;
        const char* value;  // nullptr = flip categorical/label to the other value
    };
    const std::vector<Perturbation> cases = {
        {"numeric feature value", 0, 3, "9.75"},
        {"categorical to other existing", 1, 2, nullptr},
        {"categorical to novel", 2, 2, "purple"},
        {"label flip", 3, 1, nullptr},
        {"numeric made missing", 4, 4, ""},
    };
    for (const Perturbation& c : cases) {
        INFO(c.name);
        Table patched = base;
        std::string& cell = patched.rows[test_rows[c.row_of_test]][c.column];
        if (c.value) {
            cell = c.value;
        } else if (c.column == 2) {
            cell = cell == "red" ? "blue" : "red";
        } else {
            cell = cell == "a" ? "b" : "a";
        }
        const std::string path = dir + "/" + std::to_string(c.row_of_test) + ".csv";
        testutil::write_text(path, patched.csv());
        const auto state = fitted_state(path, dir + "/out_" + std::to_string(c.row_of_test));
        CHECK(state.first == baseline.first);
        CHECK(state.second == baseline.second);
    }
}

TEST_CASE("command-line interface", "[cli]") {
    namespace fs = std::filesystem;
    const std::string dir = testutil::scratch_dir("cli");
    const std::string csv = dir + "/data.csv";
    testutil::write_text(csv, testutil::e2e_csv(40, 5));
    const std::string dcfg = fixture("sample_data_config.json");
    const std::string acfg = fixture("sample_algo_config.json");
    const std::string pcfg = fixture("sample_predict_config.json");

    SECTION("train, predict and inspect succeed") {
        CHECK(run_cli("train --data-config " + dcfg + " --algo-config " + acfg +
                      " --data " + csv + " --out " + dir) == 0);
        CHECK(fs::exists(dir + "/log_781_training.json"));
        CHECK(fs::exists(dir + "/log_781_model.json"));
        CHECK(fs::exists(dir + "/log_781.log"));

        CHECK(run_cli("predict --predict-config " + pcfg + " --data " + csv +
                      " --bundles " + dir + " --out " + dir) == 0);
        CHECK(fs::exists(dir + "/log_781_predict.json"));
        CHECK(fs::exists(dir + "/log_781_predictions.csv"));

        const std::string summary = dir + "/inspect.txt";
        const int status = std::system((std::string(RISKPIPE_CLI_PATH) +
                                        " inspect --model " + dir +
                                        "/log_781_model.json > " + summary + " 2>&1")
                                           .c_str());
        REQUIRE(status != -1);
        CHECK(WEXITSTATUS(status) == 0);
        const std::string text = testutil::read_text(summary);
        CHECK(text.find("AggClustering") != std::string::npos);

        SECTION("the binary adds nothing beyond the engine call") {
            const std::string edir = testutil::scratch_dir("cli_engine_twin");
            const DataConfig dc = parse_data_config(testutil::read_text(dcfg));
            const AlgoConfig ac = parse_algo_config(testutil::read_text(acfg));
            run_training(dc, ac, csv, edir, false);
            CHECK(testutil::read_text(edir + "/log_781_training.json") ==
                  testutil::read_text(dir + "/log_781_training.json"));
            CHECK(testutil::read_text(edir + "/log_781_model.json") ==
                  testutil::read_text(dir + "/log_781_model.json"));
        }
    }

    SECTION("seed flag overrides the configured seed") {
        const std::string sdir = testutil::scratch_dir("cli_seed");
        CHECK(run_cli("train --data-config " + dcfg + " --algo-config " + acfg +
                      " --data " + csv + " --out " + sdir + " --seed 123") == 0);
        const Json b = parse_json_text(testutil::read_text(sdir + "/log_781_model.json"));
        CHECK(b.at("seed").get<std::uint64_t>() == 123);
    }

    SECTION("exit codes") {
        CHECK(run_cli("train --data-config " + dcfg + " --algo-config " + acfg +
                      " --out " + dir) == 1);  // missing --data
        CHECK(run_cli("train --data-config " + dcfg + " --algo-config " + acfg +
                      " --data " + csv + " --out " + dir + " --frobnicate") == 1);
        CHECK(run_cli("") == 1);  // a subcommand is required

        const std::string broken = dir + "/broken.json";
        testutil::write_text(broken, "{");
        CHECK(run_cli("train --data-config " + broken + " --algo-config " + acfg +
                      " --data " + csv + " --out " + dir) == 1);

        CHECK(run_cli("train --data-config " + dcfg + " --algo-config " + acfg +
                      " --data " + dir + "/missing.csv --out " + dir) == 2);

        CHECK(run_cli("predict --predict-config " + pcfg + " --data " + csv +
                      " --bundles " + testutil::scratch_dir("cli_empty") + " --out " + dir) ==
              1);  // unresolvable bundle description

        CHECK(run_cli("--help") == 0);
    }
}

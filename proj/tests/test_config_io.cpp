// Configuration parsing, numeric round-trips, RNG determinism, CSV ingest,
// and train/test splitting.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "riskpipe/config.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/json_util.hpp"
#include "riskpipe/rng.hpp"

using namespace riskpipe;

static std::string fixture(const std::string& name) {
    return std::string(RISKPIPE_FIXTURE_DIR) + "/" + name;
}

TEST_CASE("data configuration document parses field by field") {
    const DataConfig dc = parse_data_config(testutil::read_text(fixture("sample_data_config.json")));
    CHECK(dc.log_prefix == "log");
    CHECK(dc.run_id == 781);
    CHECK(dc.dataset_name == "test");
    CHECK(dc.dataset_type == "point-in-time");
    CHECK(dc.dataset_format == DatasetFormat::csv);
    CHECK(dc.group == "Type");
    CHECK(dc.patient_id == "Sample");
    CHECK(dc.labels == std::vector<std::string>{"Type"});
    CHECK(dc.time.empty());
    CHECK(dc.features2drop == std::vector<std::string>{"A", "B"});
    CHECK(dc.phase == Phase::training_predict);
    CHECK(dc.categorical_features == std::vector<std::string>{"C", "D"});
    CHECK(dc.split_percentage == 80);
    CHECK(dc.split_type == SplitType::random);
    CHECK(dc.seed == 0);  // absent from the document
}

TEST_CASE("algorithm configuration document parses field by field") {
    const AlgoConfig ac = parse_algo_config(testutil::read_text(fixture("sample_algo_config.json")));
    CHECK(ac.phase == "training");
    CHECK(ac.config_name == "AggClustering");
    CHECK(ac.description == "AggClustering");
    CHECK(ac.task == Task::clustering);
    CHECK(ac.algorithm == ModelFamily::AggClustering);
    CHECK(ac.algorithm_name == "AggClustering");
    CHECK(ac.preprocessing.standardization_feature);
    CHECK_FALSE(ac.preprocessing.standardization_label);
    CHECK_FALSE(ac.preprocessing.scaling_feature);
    CHECK_FALSE(ac.preprocessing.scaling_label);
    CHECK(ac.imputation.perc_nan_to_drop == 0.5);
    CHECK(ac.imputation.categorical == CategoricalImpute::most_frequent);
    CHECK(ac.imputation.not_categorical == NumericImpute::mean);
    REQUIRE(ac.algorithm_params.size() == 2);
    CHECK(ac.algorithm_params[0].first == "n_clusters");
    CHECK(std::get<double>(ac.algorithm_params[0].second.values.front()) == 5.0);
    CHECK_FALSE(ac.algorithm_params[0].second.is_grid_axis);
    CHECK(ac.algorithm_params[1].first == "linkage");
    CHECK(std::get<std::string>(ac.algorithm_params[1].second.values.front()) == "average");
}

TEST_CASE("prediction configuration document parses field by field") {
    const PredictConfig pc =
        parse_predict_config(testutil::read_text(fixture("sample_predict_config.json")));
    CHECK(pc.log_prefix == "log");
    CHECK(pc.run_id == 781);
    CHECK(pc.dataset_name == "test");
    CHECK(pc.dataset_type == "point-in-time");
    CHECK(pc.dataset_format == "csv");
    CHECK(pc.description == "AggClustering");
}

TEST_CASE("configuration rejections carry the offending field") {
    const std::string base = testutil::read_text(fixture("sample_data_config.json"));

    SECTION("unknown phase enumeration lists the alternatives") {
        std::string doc = base;
        const auto pos = doc.find("training_predict");
        doc.replace(pos, std::string("training_predict").size(), "tuning");
        try {
            parse_data_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("phase") != std::string::npos);
            CHECK(msg.find("training_predict") != std::string::npos);
        }
    }
    SECTION("split_type outside the enumeration") {
        std::string doc = base;
        const auto pos = doc.find("\"random\"");
        doc.replace(pos, 8, "\"iterative\"");
        CHECK_THROWS_AS(parse_data_config(doc), ConfigError);
    }
    SECTION("negative seed") {
        std::string doc = base;
        doc.insert(doc.rfind('}'), ", \"seed\": -3");
        CHECK_THROWS_AS(parse_data_config(doc), ConfigError);
    }
    SECTION("missing runtime.run_id") {
        std::string doc = base;
        const auto pos = doc.find("run_id");
        doc.replace(pos, 6, "run_xx");
        CHECK_THROWS_AS(parse_data_config(doc), ConfigError);
    }
    SECTION("malformed JSON is a configuration error") {
        CHECK_THROWS_AS(parse_data_config("{"), ConfigError);
    }
}

TEST_CASE("algorithm configuration cross-field rules") {
    const std::string base = testutil::read_text(fixture("sample_algo_config.json"));

    SECTION("standardization and scaling are mutually exclusive") {
        std::string doc = base;
        const auto pos = doc.find("\"scaling_feature\": false");
        doc.replace(pos, std::string("\"scaling_feature\": false").size(),
                    "\"scaling_feature\": true");
        CHECK_THROWS_AS(parse_algo_config(doc), ConfigError);
    }
    SECTION("unknown algorithm name lists the supported families") {
        std::string doc = base;
        auto pos = doc.find("\"AggClustering\": {");
        doc.replace(pos, std::string("\"AggClustering\"").size(), "\"SuperLearner\"");
        try {
            parse_algo_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("RandomForest") != std::string::npos);
        }
    }
    SECTION("task / family support matrix") {
        std::string doc = base;
        const auto pos = doc.find("\"clustering\"");
        doc.replace(pos, std::string("\"clustering\"").size(), "\"classification\"");
        CHECK_THROWS_AS(parse_algo_config(doc), ConfigError);
    }
    SECTION("rfe on a family without feature weights is rejected") {
        // KNN exposes no importances, so enabling elimination cannot work.
        const std::string doc = R"({"algorithm": {"phase": "training",
            "config_name": "c", "description": "d", "type": "classification",
            "parameters": {"KNN": {"k": 3},
                           "rfe": {"enabled": true, "n_features_to_select": 2}}}})";
        CHECK_THROWS_AS(parse_algo_config(doc), ConfigError);
    }
    SECTION("smote outside classification is rejected") {
        const std::string doc = R"({"algorithm": {"phase": "training",
            "config_name": "c", "description": "d", "type": "regression",
            "parameters": {"ElasticNet": {"alpha": 0.5},
                           "smote": {"enabled": true}}}})";
        CHECK_THROWS_AS(parse_algo_config(doc), ConfigError);
    }
    SECTION("label transform requires regression") {
        const std::string doc = R"({"algorithm": {"phase": "training",
            "config_name": "c", "description": "d", "type": "classification",
            "parameters": {"preprocessing": {"standardization_label": true},
                           "KNN": {"k": 3}}}})";
        CHECK_THROWS_AS(parse_algo_config(doc), ConfigError);
    }
}

TEST_CASE("decimal fields survive serialization bit-exactly") {
    const std::vector<double> cases = {3.141592653589793,  1.0 / 3.0, 1e-300, -0.0, 42.0,
                                       -1.7976931348623157e308, 5e-324};
    for (const double v : cases) {
        const double back = parse_g17(format_g17(v));
        CHECK(testutil::bits_equal(v, back));
    }
    CHECK_THROWS_AS(parse_g17("not-a-number"), ConfigError);
    CHECK_THROWS_AS(parse_g17(""), ConfigError);
    CHECK_THROWS_AS(parse_g17("1.5x"), ConfigError);
}

TEST_CASE("generator is deterministic and well behaved") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());

    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = c.uniform_int(10);
        CHECK(v < 10);
    }

    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    Rng d(3);
    d.shuffle(w);
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);
    CHECK(w != v);  // astronomically unlikely to be identity

    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("csv ingestion types columns and flags problems") {
    const std::string dir = testutil::scratch_dir("config_io_csv");
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    dc.categorical_features = {"c"};

    SECTION("typed read with missing tokens") {
        testutil::write_text(dir + "/d.csv",
                             "id,y,c,x\n"
                             "1,0,red,1.5\n"
                             "2,1,,2.5\n"
                             "3,0,blue,\n");
        const TabularDataset ds = read_csv_dataset(dir + "/d.csv", dc);
        REQUIRE(ds.n_rows() == 3);
        REQUIRE(ds.n_cols() == 4);
        CHECK(ds.schemas[0].role == ColumnRole::id);
        CHECK(ds.schemas[1].role == ColumnRole::label);
        CHECK(ds.schemas[2].kind == ColumnKind::categorical);
        CHECK(ds.schemas[2].categories == std::vector<std::string>{"red", "blue"});
        CHECK(cell_missing(ds.cells(1, 2)));
        CHECK(cell_missing(ds.cells(2, 3)));
        CHECK(ds.cells(0, 3) == 1.5);
        CHECK(ds.train_rows.size() == 3);
    }
    SECTION("undeclared text feature column is an error") {
        testutil::write_text(dir + "/bad.csv", "id,y,c,x\n1,0,red,oops\n");
        CHECK_THROWS_AS(read_csv_dataset(dir + "/bad.csv", dc), DataError);
    }
    SECTION("declared column absent from the header") {
        testutil::write_text(dir + "/nohead.csv", "id,y,x\n1,0,2\n");
        CHECK_THROWS_AS(read_csv_dataset(dir + "/nohead.csv", dc), DataError);
    }
    SECTION("ragged row") {
        testutil::write_text(dir + "/ragged.csv", "id,y,c,x\n1,0,red\n");
        CHECK_THROWS_AS(read_csv_dataset(dir + "/ragged.csv", dc), DataError);
    }
    SECTION("quoted fields with commas and escaped quotes round-trip") {
        testutil::write_text(dir + "/q.csv",
                             "id,y,c,x\n"
                             "1,0,\"red, dark\",1\n"
                             "2,1,\"say \"\"hi\"\"\",2\n");
        const TabularDataset ds = read_csv_dataset(dir + "/q.csv", dc);
        CHECK(ds.schemas[2].categories ==
              std::vector<std::string>{"red, dark", "say \"hi\""});
        write_csv_dataset(ds, dir + "/q2.csv");
        const TabularDataset back = read_csv_dataset(dir + "/q2.csv", dc);
        CHECK(back.schemas[2].categories == ds.schemas[2].categories);
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            for (std::size_t c = 0; c < ds.n_cols(); ++c)
                CHECK(((cell_missing(ds.cells(r, c)) && cell_missing(back.cells(r, c))) ||
                       ds.cells(r, c) == back.cells(r, c)));
    }
}

TEST_CASE("train/test splitting") {
    const std::string dir = testutil::scratch_dir("config_io_split");
    std::string csv = "id,y,x\n";
    for (int i = 0; i < 40; ++i)
        csv += std::to_string(i) + "," + std::to_string(i % 2) + "," + std::to_string(i) + "\n";
    testutil::write_text(dir + "/d.csv", csv);

    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    dc.phase = Phase::training_predict;
    dc.split_percentage = 80;
    dc.seed = 11;

    SECTION("random split is sized, disjoint, and seed-deterministic") {
        dc.split_type = SplitType::random;
        const TabularDataset a = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
        CHECK(a.train_rows.size() == 32);
        CHECK(a.test_rows.size() == 8);
        std::set<std::size_t> all(a.train_rows.begin(), a.train_rows.end());
        all.insert(a.test_rows.begin(), a.test_rows.end());
        CHECK(all.size() == 40);

        const TabularDataset b = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
        CHECK(a.train_rows == b.train_rows);

        dc.seed = 12;
        const TabularDataset c = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
        CHECK(a.train_rows != c.train_rows);
    }
    SECTION("group matching a label stratifies the random split") {
        dc.group = "y";  // 20 rows of each class
        const TabularDataset a = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
        REQUIRE(a.train_rows.size() == 32);
        std::size_t ones = 0;
        for (const std::size_t r : a.train_rows)
            if (a.cells(r, 1) == 1.0) ++ones;
        CHECK(ones == 16);
    }
    SECTION("sequential split keeps file order") {
        dc.split_type = SplitType::sequential;
        const TabularDataset a = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
        REQUIRE(a.train_rows.size() == 32);
        for (std::size_t i = 0; i < 32; ++i) CHECK(a.train_rows[i] == i);
        for (std::size_t i = 0; i < 8; ++i) CHECK(a.test_rows[i] == 32 + i);
    }
    SECTION("degenerate split percentages are rejected at parse time") {
        for (const std::string pct : {"0", "100", "-5", "101"}) {
            const std::string doc = R"({"runtime": {"run_id": 1},
                "dataset": {"name": "d", "type": "point-in-time", "format": "csv"},
                "PatientID": "id", "labels": ["y"], "phase": "training_predict",
                "split_percentage": )" + pct + "}";
            CHECK_THROWS_AS(parse_data_config(doc), ConfigError);
        }
    }
    SECTION("a split emptying either side is an error") {
        dc.split_percentage = 1;  // 40 rows -> zero train rows
        CHECK_THROWS_AS(split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc), DataError);
    }
}

TEST_CASE("prediction-time reading follows the trained schema") {
    const std::string dir = testutil::scratch_dir("config_io_predict_read");
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    dc.categorical_features = {"c"};
    testutil::write_text(dir + "/train.csv",
                         "id,y,c,x\n"
                         "1,0,red,1\n"
                         "2,1,blue,2\n");
    const TabularDataset trained = read_csv_dataset(dir + "/train.csv", dc);

    SECTION("extra columns are ignored, label optional") {
        testutil::write_text(dir + "/new.csv",
                             "x,c,extra,id\n"
                             "5,blue,zzz,9\n");
        const TabularDataset ds = read_predict_data(dir + "/new.csv", trained.schemas);
        CHECK(ds.test_rows.size() == 1);
        bool has_extra = false, has_label = false;
        for (const ColumnSchema& s : ds.schemas) {
            if (s.name == "extra") has_extra = true;
            if (s.name == "y") has_label = true;
        }
        CHECK_FALSE(has_extra);
        CHECK_FALSE(has_label);
    }
    SECTION("missing required feature column") {
        testutil::write_text(dir + "/miss.csv", "id,c\n1,red\n");
        CHECK_THROWS_AS(read_predict_data(dir + "/miss.csv", trained.schemas), DataError);
    }
    SECTION("unseen category becomes a missing cell") {
        testutil::write_text(dir + "/unseen.csv", "id,c,x\n1,violet,3\n");
        const TabularDataset ds = read_predict_data(dir + "/unseen.csv", trained.schemas);
        std::size_t c_col = 0;
        for (std::size_t c = 0; c < ds.n_cols(); ++c)
            if (ds.schemas[c].name == "c") c_col = c;
        CHECK(cell_missing(ds.cells(0, c_col)));
    }
}

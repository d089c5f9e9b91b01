// Imputation, scaling, encoding, label transforms, and SMOTE resampling.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/preprocess.hpp"
#include "riskpipe/smote.hpp"

using namespace riskpipe;

namespace {

// Dataset with controlled missingness: id, label y, categorical c, numeric x1..x2.
TabularDataset small_ds(const std::string& dir) {
    testutil::write_text(dir + "/d.csv",
                         "id,y,c,x1,x2\n"
                         "1,0,red,1,10\n"
                         "2,1,red,2,\n"
                         "3,0,blue,3,30\n"
                         "4,1,,,40\n"
                         "5,0,red,10,20\n"
                         "6,1,blue,2,\n");
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    dc.categorical_features = {"c"};
    return read_csv_dataset(dir + "/d.csv", dc);
}

AlgoConfig basic_ac() {
    AlgoConfig ac;
    ac.task = Task::classification;
    return ac;
}

}  // namespace

TEST_CASE("numeric imputation learns train statistics") {
    const std::string dir = testutil::scratch_dir("prep_impute");
    TabularDataset ds = small_ds(dir);
    AlgoConfig ac = basic_ac();

    SECTION("mean fill") {
        ac.imputation.not_categorical = NumericImpute::mean;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        // x1 observed: 1,2,3,10,2 -> mean 3.6 ; x2 observed: 10,30,40,20 -> 25
        CHECK(st.numeric_impute.at("x1").value == Catch::Approx(3.6).epsilon(1e-12));
        CHECK(st.numeric_impute.at("x2").value == Catch::Approx(25.0).epsilon(1e-12));
        const EncodedDataset enc = apply_preprocess(st, ds);
        std::size_t x1 = 0;
        for (std::size_t j = 0; j < enc.feature_names.size(); ++j)
            if (enc.feature_names[j] == "x1") x1 = j;
        CHECK(enc.features(3, x1) == Catch::Approx(3.6));  // row 4 had a blank x1
    }
    SECTION("median fill uses the midpoint for even counts") {
        ac.imputation.not_categorical = NumericImpute::median;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        CHECK(st.numeric_impute.at("x1").value == Catch::Approx(2.0));   // 1,2,2,3,10
        CHECK(st.numeric_impute.at("x2").value == Catch::Approx(25.0));  // 10,20,30,40
    }
    SECTION("regression fill follows an exact linear relation") {
        const std::string d2 = testutil::scratch_dir("prep_impute_reg");
        // x2 = 3*x1 + 1 exactly; one missing x2 cell must be restored.
        testutil::write_text(d2 + "/d.csv",
                             "id,y,x1,x2\n"
                             "1,0,1,4\n"
                             "2,1,2,7\n"
                             "3,0,3,10\n"
                             "4,1,4,\n"
                             "5,0,5,16\n");
        DataConfig dc;
        dc.patient_id = "id";
        dc.labels = {"y"};
        TabularDataset reg = read_csv_dataset(d2 + "/d.csv", dc);
        AlgoConfig rac = basic_ac();
        rac.imputation.not_categorical = NumericImpute::regression;
        const PreprocessState st = fit_preprocess(reg, rac, 1);
        const EncodedDataset enc = apply_preprocess(st, reg);
        std::size_t x2 = 0;
        for (std::size_t j = 0; j < enc.feature_names.size(); ++j)
            if (enc.feature_names[j] == "x2") x2 = j;
        CHECK(enc.features(3, x2) == Catch::Approx(13.0).margin(1e-6));
    }
}

TEST_CASE("categorical imputation") {
    const std::string dir = testutil::scratch_dir("prep_cat");
    TabularDataset ds = small_ds(dir);
    AlgoConfig ac = basic_ac();

    SECTION("most frequent picks the modal category") {
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        CHECK(st.categorical_impute.at("c").mode_index == 0);  // "red" x3 vs "blue" x2
        const EncodedDataset enc = apply_preprocess(st, ds);
        std::size_t red = 0;
        for (std::size_t j = 0; j < enc.feature_names.size(); ++j)
            if (enc.feature_names[j] == "c=red") red = j;
        CHECK(enc.features(3, red) == 1.0);  // row 4's blank c imputed to red
    }
    SECTION("random sampling is seed-deterministic and train-distributed") {
        ac.imputation.categorical = CategoricalImpute::random_sample;
        const PreprocessState st = fit_preprocess(ds, ac, 7);
        const EncodedDataset a = apply_preprocess(st, ds);
        const EncodedDataset b = apply_preprocess(st, ds);
        for (std::size_t i = 0; i < a.features.data.size(); ++i)
            CHECK(testutil::bits_equal(a.features.data[i], b.features.data[i]));
    }
}

TEST_CASE("columns exceeding the missingness threshold are dropped") {
    const std::string dir = testutil::scratch_dir("prep_drop");
    testutil::write_text(dir + "/d.csv",
                         "id,y,x1,x2\n"
                         "1,0,,1\n"
                         "2,1,,2\n"
                         "3,0,,3\n"
                         "4,1,5,4\n");
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    TabularDataset ds = read_csv_dataset(dir + "/d.csv", dc);
    AlgoConfig ac = basic_ac();
    ac.imputation.perc_nan_to_drop = 0.5;  // x1 is 75% missing
    const PreprocessState st = fit_preprocess(ds, ac, 1);
    CHECK(st.dropped_columns == std::vector<std::string>{"x1"});
    const EncodedDataset enc = apply_preprocess(st, ds);
    CHECK(enc.feature_names == std::vector<std::string>{"x2"});
}

TEST_CASE("feature standardization and scaling use train rows only") {
    const std::string dir = testutil::scratch_dir("prep_scale");
    std::string csv = "id,y,x\n";
    for (int i = 0; i < 20; ++i)
        csv += std::to_string(i) + "," + std::to_string(i % 2) + "," + std::to_string(i * 3 + 1) +
               "\n";
    testutil::write_text(dir + "/d.csv", csv);
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"y"};
    dc.phase = Phase::training_predict;
    dc.split_percentage = 75;
    dc.seed = 5;
    TabularDataset ds = split_dataset(read_csv_dataset(dir + "/d.csv", dc), dc);
    AlgoConfig ac = basic_ac();

    SECTION("standardized train column has zero mean unit variance") {
        ac.preprocessing.standardization_feature = true;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        const EncodedDataset enc = apply_preprocess(st, ds);
        double s = 0.0, s2 = 0.0;
        for (const std::size_t r : ds.train_rows) {
            s += enc.features(r, 0);
            s2 += enc.features(r, 0) * enc.features(r, 0);
        }
        const double n = static_cast<double>(ds.train_rows.size());
        CHECK(std::abs(s / n) < 1e-12);
        CHECK(s2 / n == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("min-max scaled train column spans [0,1]") {
        ac.preprocessing.scaling_feature = true;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        const EncodedDataset enc = apply_preprocess(st, ds);
        double lo = 1e300, hi = -1e300;
        for (const std::size_t r : ds.train_rows) {
            lo = std::min(lo, enc.features(r, 0));
            hi = std::max(hi, enc.features(r, 0));
        }
        CHECK(lo == Catch::Approx(0.0).margin(1e-12));
        CHECK(hi == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("test rows reuse train statistics verbatim") {
        ac.preprocessing.standardization_feature = true;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        // Perturb a test-row cell and refit: the state must not move.
        TabularDataset mutated = ds;
        mutated.cells(ds.test_rows.front(), 2) = 1e6;
        const PreprocessState st2 = fit_preprocess(mutated, ac, 1);
        CHECK(to_json(st).dump() == to_json(st2).dump());
    }
}

TEST_CASE("one-hot encoding emits one indicator per category") {
    const std::string dir = testutil::scratch_dir("prep_onehot");
    TabularDataset ds = small_ds(dir);
    const PreprocessState st = fit_preprocess(ds, basic_ac(), 1);
    const EncodedDataset enc = apply_preprocess(st, ds);
    std::vector<std::string> c_cols;
    for (const std::string& n : enc.feature_names)
        if (n.rfind("c=", 0) == 0) c_cols.push_back(n);
    CHECK(c_cols == std::vector<std::string>{"c=red", "c=blue"});
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        double total = 0.0;
        for (std::size_t j = 0; j < enc.feature_names.size(); ++j)
            if (enc.feature_names[j].rfind("c=", 0) == 0) total += enc.features(r, j);
        CHECK(total == 1.0);
    }
}

TEST_CASE("regression label transforms invert exactly") {
    const std::string dir = testutil::scratch_dir("prep_label");
    std::string csv = "id,t,x\n";
    for (int i = 0; i < 12; ++i)
        csv += std::to_string(i) + "," + std::to_string(i * 7 + 3) + "," + std::to_string(i) + "\n";
    testutil::write_text(dir + "/d.csv", csv);
    DataConfig dc;
    dc.patient_id = "id";
    dc.labels = {"t"};
    TabularDataset ds = read_csv_dataset(dir + "/d.csv", dc);

    for (const bool standardize : {true, false}) {
        AlgoConfig ac;
        ac.task = Task::regression;
        ac.preprocessing.standardization_label = standardize;
        ac.preprocessing.scaling_label = !standardize;
        const PreprocessState st = fit_preprocess(ds, ac, 1);
        const EncodedDataset enc = apply_preprocess(st, ds);
        const std::vector<double> raw = enc.labels.at("t");
        const std::vector<double> back = invert_label_transform(st, enc.target);
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(back[i] == Catch::Approx(raw[i]).epsilon(1e-12));
        if (!standardize) {
            for (const std::size_t r : ds.train_rows) {
                CHECK(enc.target[r] >= -1e-12);
                CHECK(enc.target[r] <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("preprocess state survives serialization") {
    const std::string dir = testutil::scratch_dir("prep_roundtrip");
    TabularDataset ds = small_ds(dir);
    AlgoConfig ac = basic_ac();
    ac.preprocessing.standardization_feature = true;
    const PreprocessState st = fit_preprocess(ds, ac, 99);
    const PreprocessState back = preprocess_state_from_json(to_json(st));
    CHECK(to_json(back).dump() == to_json(st).dump());
    const EncodedDataset a = apply_preprocess(st, ds);
    const EncodedDataset b = apply_preprocess(back, ds);
    REQUIRE(a.features.data.size() == b.features.data.size());
    for (std::size_t i = 0; i < a.features.data.size(); ++i)
        CHECK(testutil::bits_equal(a.features.data[i], b.features.data[i]));
}

TEST_CASE("smote balances classes by valid interpolation") {
    // 4 positive vs 20 negative rows, p=3.
    Rng rng(41);
    Matrix X(24, 3);
    std::vector<double> y;
    for (std::size_t r = 0; r < 24; ++r) {
        const bool minority = r < 4;
        for (std::size_t c = 0; c < 3; ++c)
            X(r, c) = (minority ? 5.0 : 0.0) + testutil::gauss(rng);
        y.push_back(minority ? 1.0 : 0.0);
    }

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SmoteResult res = smote_balance(X, y, 5, seed);  // k clamps to 3
        REQUIRE(res.n_synthetic == 16);
        REQUIRE(res.features.rows == 40);
        std::map<double, std::size_t> counts;
        for (const double v : res.target) counts[v]++;
        CHECK(counts[0.0] == 20);
        CHECK(counts[1.0] == 20);

        // Original rows pass through untouched.
        for (std::size_t r = 0; r < 24; ++r)
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(testutil::bits_equal(res.features(r, c), X(r, c)));

        // Each synthetic row reconstructs as x + lambda (x_nn - x) with x_nn
        // among the k nearest same-class neighbors of x.
        const std::vector<std::size_t> minority_rows = {0, 1, 2, 3};
        for (std::size_t s = 24; s < 40; ++s) {
            CHECK(res.target[s] == 1.0);
            bool matched = false;
            for (const std::size_t a : minority_rows) {
                for (const std::size_t b : minority_rows) {
                    if (a == b) continue;
                    // lambda from the first coordinate with a gap.
                    double lambda = 0.0;
                    bool found = false;
                    for (std::size_t c = 0; c < 3 && !found; ++c) {
                        const double gap = X(b, c) - X(a, c);
                        if (std::abs(gap) > 1e-12) {
                            lambda = (res.features(s, c) - X(a, c)) / gap;
                            found = true;
                        }
                    }
                    if (!found || lambda < -1e-9 || lambda > 1.0 + 1e-9) continue;
                    double residual = 0.0;
                    for (std::size_t c = 0; c < 3; ++c)
                        residual = std::max(
                            residual, std::abs(res.features(s, c) -
                                               (X(a, c) + lambda * (X(b, c) - X(a, c)))));
                    if (residual <= 1e-9) matched = true;
                }
            }
            CHECK(matched);
        }
    }

    SECTION("singleton minority class cannot interpolate") {
        Matrix X1(3, 1);
        X1(0, 0) = 0;
        X1(1, 0) = 1;
        X1(2, 0) = 2;
        CHECK_THROWS(smote_balance(X1, {0.0, 0.0, 1.0}, 5, 1));
    }
}

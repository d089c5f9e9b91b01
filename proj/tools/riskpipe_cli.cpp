// riskpipe command-line front door: train / predict / inspect.
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "riskpipe/bundle.hpp"
#include "riskpipe/engine.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw riskpipe::ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_train(const std::string& data_config, const std::string& algo_config,
              const std::string& data, const std::string& out,
              std::optional<std::uint64_t> seed, bool quiet) {
    riskpipe::DataConfig dc = riskpipe::parse_data_config(slurp(data_config));
    const riskpipe::AlgoConfig ac = riskpipe::parse_algo_config(slurp(algo_config));
    if (seed) dc.seed = *seed;
    const riskpipe::RunArtifacts art = riskpipe::run_training(dc, ac, data, out, !quiet);
    std::cout << "results: " << art.results_path << "\n"
              << "bundle:  " << art.bundle_path << "\n"
              << "log:     " << art.log_path << "\n";
    return 0;
}

int cmd_predict(const std::string& predict_config, const std::string& data,
                const std::string& bundles, const std::string& out, bool quiet) {
    const riskpipe::PredictConfig pc = riskpipe::parse_predict_config(slurp(predict_config));
    const riskpipe::RunArtifacts art =
        riskpipe::run_predict_pretrained(pc, data, bundles, out, !quiet);
    std::cout << "results:     " << art.results_path << "\n"
              << "predictions: " << art.predictions_path << "\n"
              << "log:         " << art.log_path << "\n";
    return 0;
}

int cmd_inspect(const std::string& model_path) {
    const riskpipe::ModelBundle b = riskpipe::load_bundle(model_path);
    std::cout << "description:    " << b.description << "\n"
              << "schema version: " << b.schema_version << "\n"
              << "algorithm:      " << riskpipe::to_string(b.model.spec.family) << "\n"
              << "task:           " << riskpipe::to_string(b.model.spec.task) << "\n"
              << "seed:           " << b.seed << "\n";
    std::cout << "parameters:\n";
    for (const auto& [name, value] : b.model.spec.params)
        std::cout << "  " << name << " = "
                  << riskpipe::detail::param_value_to_json(value).dump() << "\n";
    std::cout << "features (" << b.model.feature_order.size() << "):\n";
    for (const std::string& f : b.model.feature_order) std::cout << "  " << f << "\n";
    if (!b.model.classes.empty()) {
        std::cout << "classes:";
        for (const double c : b.model.classes) std::cout << " " << riskpipe::format_g17(c);
        std::cout << "\n";
    }
    if (b.rfe) std::cout << "rfe: " << b.rfe->dump() << "\n";
    if (b.cv_report) std::cout << "cv_report: best_params "
                               << b.cv_report->at("best_params").dump() << "\n";
    std::cout << "training metrics:\n" << b.training_metrics.dump(1) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"riskpipe: configuration-driven tabular ML pipelines"};
    app.require_subcommand(1);

    std::string data_config, algo_config, data, out = ".", predict_config, bundles = ".";
    std::string model_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    CLI::App* train = app.add_subcommand("train", "fit a model from two config files");
    train->add_option("--data-config", data_config, "data configuration JSON")->required();
    train->add_option("--algo-config", algo_config, "algorithm configuration JSON")->required();
    train->add_option("--data", data, "training data file")->required();
    train->add_option("--out", out, "output directory");
    train->add_option("--seed", seed, "override the data-config seed");
    train->add_flag("--quiet", quiet, "suppress console logging");

    CLI::App* predict = app.add_subcommand("predict", "apply a stored bundle to new data");
    predict->add_option("--predict-config", predict_config, "prediction configuration JSON")
        ->required();
    predict->add_option("--data", data, "prediction data file")->required();
    predict->add_option("--bundles", bundles, "directory holding model bundles");
    predict->add_option("--out", out, "output directory");
    predict->add_flag("--quiet", quiet, "suppress console logging");

    CLI::App* inspect = app.add_subcommand("inspect", "summarize a model bundle");
    inspect->add_option("--model", model_path, "model bundle JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train->parsed()) return cmd_train(data_config, algo_config, data, out, seed, quiet);
        if (predict->parsed()) return cmd_predict(predict_config, data, bundles, out, quiet);
        return cmd_inspect(model_path);
    } catch (const riskpipe::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

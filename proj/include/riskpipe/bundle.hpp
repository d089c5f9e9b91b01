#pragma once

// Model bundles: one self-contained JSON document holding everything needed
// to reload a trained pipeline and reproduce its predictions bit-exactly.
// All floating-point payloads are stored as 17-significant-digit decimal
// strings, so save -> load -> save is byte-identical.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "riskpipe/config.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/json_util.hpp"
#include "riskpipe/log.hpp"
#include "riskpipe/model.hpp"
#include "riskpipe/preprocess.hpp"

namespace riskpipe {

inline constexpr int kBundleSchemaVersion = 1;

struct ModelBundle {
    int schema_version = kBundleSchemaVersion;
    std::string description;
    Json data_config = Json::object();  // parse-time echo
    Json algo_config = Json::object();  // echo with post-default model parameters
    std::vector<ColumnSchema> schemas;  // training column schemas (frozen categories)
    PreprocessState preprocess;
    FittedModel model;
    std::optional<Json> rfe;
    std::optional<Json> cv_report;
    Json training_metrics = Json::object();
    std::uint64_t seed = 0;

    std::uint64_t run_id() const {
        if (data_config.contains("runtime") && data_config["runtime"].contains("run_id"))
            return data_config["runtime"]["run_id"].get<std::uint64_t>();
        return 0;
    }
};

namespace detail {

inline Json schema_to_json(const ColumnSchema& s) {
    Json j;
    j["name"] = s.name;
    j["kind"] = to_string(s.kind);
    j["role"] = to_string(s.role);
    if (s.kind == ColumnKind::categorical) j["categories"] = s.categories;
    return j;
}

inline ColumnSchema schema_from_json(const Json& j) {
    ColumnSchema s;
    s.name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "numeric")
        s.kind = ColumnKind::numeric;
    else if (kind == "categorical")
        s.kind = ColumnKind::categorical;
    else
        throw ConfigError("unknown column kind '" + kind + "'");
    const std::string role = j.at("role").get<std::string>();
    if (role == "feature")
        s.role = ColumnRole::feature;
    else if (role == "label")
        s.role = ColumnRole::label;
    else if (role == "id")
        s.role = ColumnRole::id;
    else if (role == "group")
        s.role = ColumnRole::group;
    else if (role == "time")
        s.role = ColumnRole::time;
    else if (role == "dropped")
        s.role = ColumnRole::dropped;
    else
        throw ConfigError("unknown column role '" + role + "'");
    if (s.kind == ColumnKind::categorical)
        s.categories = j.at("categories").get<std::vector<std::string>>();
    return s;
}

}  // namespace detail

inline Json to_json(const ModelBundle& b) {
    Json j;
    j["schema_version"] = b.schema_version;
    j["description"] = b.description;
    j["seed"] = b.seed;
    j["data_config"] = b.data_config;
    j["algo_config"] = b.algo_config;
    Json schemas = Json::array();
    for (const ColumnSchema& s : b.schemas) schemas.push_back(detail::schema_to_json(s));
    j["column_schemas"] = std::move(schemas);
    j["preprocess"] = to_json(b.preprocess);
    j["model"] = to_json(b.model);
    if (b.rfe) j["rfe"] = *b.rfe;
    if (b.cv_report) j["cv_report"] = *b.cv_report;
    j["training_metrics"] = b.training_metrics;
    return j;
}

inline ModelBundle bundle_from_json(const Json& j) {
    ModelBundle b;
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw ConfigError("not a model bundle: missing integer \"schema_version\"");
    b.schema_version = j["schema_version"].get<int>();
    if (b.schema_version != kBundleSchemaVersion)
        throw ConfigError("unsupported bundle schema_version " +
                          std::to_string(b.schema_version) + " (this build reads version " +
                          std::to_string(kBundleSchemaVersion) + ")");
    auto section = [&j](const char* key, auto parse) {
        try {
            return parse(j.at(key));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bundle field \"") + key + "\": " + e.what());
        }
    };
    b.description = j.at("description").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.data_config = j.at("data_config");
    b.algo_config = j.at("algo_config");
    b.schemas = section("column_schemas", [](const Json& s) {
        std::vector<ColumnSchema> out;
        for (const auto& e : s) out.push_back(detail::schema_from_json(e));
        return out;
    });
    b.preprocess =
        section("preprocess", [](const Json& s) { return preprocess_state_from_json(s); });
    b.model = section("model", [](const Json& s) { return fitted_model_from_json(s); });
    if (j.contains("rfe")) b.rfe = j["rfe"];
    if (j.contains("cv_report")) b.cv_report = j["cv_report"];
    b.training_metrics = j.at("training_metrics");
    return b;
}

/// Serialize with a fixed layout; identical bundles give identical bytes.
inline std::string bundle_text(const ModelBundle& b) { return to_json(b).dump(1) + "\n"; }

inline std::string save_bundle(const ModelBundle& b, const std::string& directory,
                               const std::string& log_prefix, std::uint64_t run_id,
                               Logger* log = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const fs::path path =
        fs::path(directory) / (log_prefix + "_" + std::to_string(run_id) + "_model.json");
    if (log && fs::exists(path))
        log->info("bundle", "overwriting existing bundle " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write bundle file: " + path.string());
    out << bundle_text(b);
    if (log) log->info("bundle", "saved model bundle " + path.string());
    return path.string();
}

inline ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open bundle file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return bundle_from_json(parse_json_text(buf.str()));
}

/// Find the bundle whose description matches, scanning `directory` for
/// version-tagged JSON documents.  Duplicate descriptions: newest run_id wins.
inline std::string resolve_bundle(const std::string& directory, const std::string& description,
                                  Logger* log = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory))
        throw ConfigError("bundle directory does not exist: " + directory);
    std::vector<std::pair<std::uint64_t, std::string>> matches;  // run_id, path
    std::vector<std::string> available;
    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        entries.push_back(entry.path());
    }
    std::sort(entries.begin(), entries.end());  // directory order is not deterministic
    for (const fs::path& path : entries) {
        Json doc;
        try {
            std::ifstream in(path, std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            doc = parse_json_text(buf.str());
        } catch (const std::exception&) {
            continue;  // not JSON; skip
        }
        if (!doc.is_object() || !doc.contains("schema_version") ||
            !doc.contains("description") || !doc["description"].is_string())
            continue;
        const std::string desc = doc["description"].get<std::string>();
        available.push_back(desc);
        if (desc != description) continue;
        std::uint64_t run_id = 0;
        if (doc.contains("data_config") && doc["data_config"].contains("runtime") &&
            doc["data_config"]["runtime"].contains("run_id"))
            run_id = doc["data_config"]["runtime"]["run_id"].get<std::uint64_t>();
        matches.emplace_back(run_id, path.string());
    }
    if (matches.empty()) {
        std::string msg = "no bundle with description \"" + description + "\" in " + directory;
        if (available.empty()) {
            msg += " (directory holds no bundles)";
        } else {
            msg += "; available: ";
            for (std::size_t i = 0; i < available.size(); ++i)
                msg += (i ? ", " : "") + ("\"" + available[i] + "\"");
        }
        throw ConfigError(msg);
    }
    std::stable_sort(matches.begin(), matches.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (matches.size() > 1 && log)
        log->info("bundle", std::to_string(matches.size()) + " bundles match \"" + description +
                                "\"; picking newest run_id " +
                                std::to_string(matches.back().first));
    return matches.back().second;
}

}  // namespace riskpipe

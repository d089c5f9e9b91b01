#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riskpipe/config.hpp"
#include "riskpipe/log.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class ColumnKind { numeric, categorical };
enum class ColumnRole { feature, label, id, group, time, dropped };

inline std::string to_string(ColumnKind k) { return k == ColumnKind::numeric ? "numeric" : "categorical"; }

inline std::string to_string(ColumnRole r) {
    switch (r) {
        case ColumnRole::feature: return "feature";
        case ColumnRole::label: return "label";
        case ColumnRole::id: return "id";
        case ColumnRole::group: return "group";
        case ColumnRole::time: return "time";
        case ColumnRole::dropped: return "dropped";
    }
    return "feature";
}

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    ColumnRole role = ColumnRole::feature;
    std::vector<std::string> categories;  // categorical only, in first-appearance order
};

/// Missing cells are quiet NaN; categorical cells hold the category index.
inline bool cell_missing(double v) { return std::isnan(v); }
inline double missing_cell() { return std::numeric_limits<double>::quiet_NaN(); }

struct TabularDataset {
    std::vector<ColumnSchema> schemas;
    Matrix cells;  // n_rows x schemas.size()
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;

    std::size_t n_rows() const { return cells.rows; }
    std::size_t n_cols() const { return schemas.size(); }

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t i = 0; i < schemas.size(); ++i)
            if (schemas[i].name == name) return i;
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// CSV dialect: comma separator, double-quote quoting with "" escapes, UTF-8,
// dot decimal, mandatory header. CRLF line endings are accepted.

namespace csv {

inline std::vector<std::vector<std::string>> parse_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };

    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_record();
            i += 2;
        } else if (c == '\n') {
            end_record();
            ++i;
        } else {
            field += c;
            ++i;
        }
    }
    if (in_quotes)
        throw DataError("CSV parse error: unterminated quoted field at row " +
                        std::to_string(records.size() + 1));
    if (!field.empty() || !record.empty() || field_was_quoted) end_record();
    return records;
}

inline std::string quote_field(const std::string& s) {
    const bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace csv

namespace detail {

inline std::string trim_ws(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
}

inline bool is_missing_token(const std::string& raw) {
    std::string t = trim_ws(raw);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    return t.empty() || t == "na" || t == "nan" || t == "null";
}

/// Parses plain decimal numbers (scientific notation included). Hex floats
/// and inf/nan spellings do not count as numeric content.
inline std::optional<double> parse_decimal(const std::string& raw) {
    const std::string t = trim_ws(raw);
    if (t.empty()) return std::nullopt;
    for (char c : t)
        if (c == 'x' || c == 'X' || c == 'i' || c == 'I' || c == 'n' || c == 'N') return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

/// Read a delimited file into a typed, role-annotated dataset. All rows start
/// out as training rows; split_dataset carves the partition afterwards.
inline TabularDataset read_csv_dataset(const std::string& path, const DataConfig& dc,
                                       Logger* log = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto records = csv::parse_records(buf.str());
    if (records.empty()) throw DataError("data file has no header row: " + path);

    const std::vector<std::string>& header = records.front();
    for (std::size_t i = 0; i < header.size(); ++i)
        for (std::size_t j = i + 1; j < header.size(); ++j)
            if (header[i] == header[j])
                throw DataError("duplicate header name \"" + header[i] + "\"");

    auto header_index = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    auto require_column = [&](const std::string& name) {
        if (!header_index(name)) throw DataError("declared column \"" + name + "\" not found in header");
    };
    require_column(dc.patient_id);
    for (const auto& c : dc.labels) require_column(c);
    for (const auto& c : dc.features2drop) require_column(c);
    for (const auto& c : dc.categorical_features) require_column(c);
    if (!dc.group.empty()) require_column(dc.group);
    if (!dc.time.empty()) require_column(dc.time);

    const std::size_t n_cols = header.size();
    const std::size_t n_rows = records.size() - 1;
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != n_cols)
            throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(n_cols));

    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };

    TabularDataset ds;
    ds.schemas.resize(n_cols);
    ds.cells = Matrix(n_rows, n_cols, missing_cell());

    for (std::size_t c = 0; c < n_cols; ++c) {
        ColumnSchema& schema = ds.schemas[c];
        schema.name = header[c];
        if (contains(dc.features2drop, schema.name))
            schema.role = ColumnRole::dropped;
        else if (schema.name == dc.patient_id)
            schema.role = ColumnRole::id;
        else if (contains(dc.labels, schema.name))
            schema.role = ColumnRole::label;
        else if (!dc.group.empty() && schema.name == dc.group)
            schema.role = ColumnRole::group;
        else if (!dc.time.empty() && schema.name == dc.time)
            schema.role = ColumnRole::time;
        else
            schema.role = ColumnRole::feature;

        bool all_numeric = true;
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::string& raw = records[r + 1][c];
            if (detail::is_missing_token(raw)) continue;
            if (!detail::parse_decimal(raw)) {
                all_numeric = false;
                break;
            }
        }
        const bool declared_categorical = contains(dc.categorical_features, schema.name);
        if (declared_categorical || !all_numeric) {
            if (!all_numeric && !declared_categorical && schema.role == ColumnRole::feature)
                throw DataError("column \"" + schema.name +
                                "\" contains non-numeric values but is not listed in categorical_features");
            schema.kind = ColumnKind::categorical;
            std::map<std::string, std::size_t> index;
            for (std::size_t r = 0; r < n_rows; ++r) {
                const std::string& raw = records[r + 1][c];
                if (detail::is_missing_token(raw)) continue;
                auto it = index.find(raw);
                if (it == index.end()) {
                    it = index.emplace(raw, schema.categories.size()).first;
                    schema.categories.push_back(raw);
                }
                ds.cells(r, c) = static_cast<double>(it->second);
            }
        } else {
            schema.kind = ColumnKind::numeric;
            for (std::size_t r = 0; r < n_rows; ++r) {
                const std::string& raw = records[r + 1][c];
                if (detail::is_missing_token(raw)) continue;
                ds.cells(r, c) = *detail::parse_decimal(raw);
            }
        }
    }

    ds.train_rows.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) ds.train_rows[r] = r;
    if (log) log->info("read_data", "loaded " + std::to_string(n_rows) + " rows, " +
                                        std::to_string(n_cols) + " columns from " + path);
    return ds;
}

/// Write a dataset back out in the same dialect; MISSING cells become empty
/// fields. Used by round-trip checks and the predictions writer.
inline void write_csv_dataset(const TabularDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    for (std::size_t c = 0; c < ds.n_cols(); ++c)
        out << (c ? "," : "") << csv::quote_field(ds.schemas[c].name);
    out << "\n";
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            if (c) out << ",";
            const double v = ds.cells(r, c);
            if (cell_missing(v)) continue;
            if (ds.schemas[c].kind == ColumnKind::categorical)
                out << csv::quote_field(ds.schemas[c].categories[static_cast<std::size_t>(v)]);
            else
                out << format_g17(v);
        }
        out << "\n";
    }
}

namespace detail {

/// Largest-remainder apportionment of `target` across class counts.
inline std::vector<std::size_t> apportion_largest_remainder(const std::vector<std::size_t>& counts,
                                                            int percentage, std::size_t target) {
    const std::size_t k = counts.size();
    std::vector<std::size_t> base(k);
    std::vector<double> frac(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double quota = static_cast<double>(counts[i]) * percentage / 100.0;
        base[i] = static_cast<std::size_t>(std::floor(quota));
        frac[i] = quota - static_cast<double>(base[i]);
        assigned += base[i];
    }
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < target && i < k; ++i) {
        const std::size_t cls = order[i];
        if (base[cls] < counts[cls]) {
            ++base[cls];
            ++assigned;
        }
    }
    // Remainders exhausted but target unmet (all fractional winners full):
    // hand the leftovers to any class with spare capacity.
    for (std::size_t i = 0; assigned < target && i < k; ++i) {
        while (assigned < target && base[i] < counts[i]) {
            ++base[i];
            ++assigned;
        }
    }
    return base;
}

}  // namespace detail

/// Partition rows into train/test. Sequential keeps file order; random uses a
/// seeded permutation; when dc.group names a label column the random split is
/// stratified per class with largest-remainder apportionment.
inline TabularDataset split_dataset(TabularDataset ds, const DataConfig& dc, Logger* log = nullptr) {
    if (dc.phase != Phase::training_predict)
        throw DataError("split_dataset requires phase \"training_predict\"");
    const std::size_t n = ds.n_rows();
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * dc.split_percentage / 100.0));
    if (n_train == 0 || n_train == n)
        throw DataError("split yields an empty train or test set (n=" + std::to_string(n) +
                        ", split_percentage=" + std::to_string(dc.split_percentage) + ")");

    std::vector<std::size_t> train, test;
    const bool stratified = dc.split_type == SplitType::random && !dc.group.empty() &&
                            std::find(dc.labels.begin(), dc.labels.end(), dc.group) != dc.labels.end();

    if (dc.split_type == SplitType::sequential) {
        for (std::size_t r = 0; r < n; ++r) (r < n_train ? train : test).push_back(r);
    } else if (!stratified) {
        std::vector<std::size_t> perm(n);
        for (std::size_t r = 0; r < n; ++r) perm[r] = r;
        Rng rng(derive_seed(dc.seed, seed_domain::split));
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : test).push_back(perm[i]);
    } else {
        const std::size_t col = *ds.column_index(dc.group);
        // Strata keyed by cell value, in first-appearance order; missing
        // cells form their own stratum.
        std::vector<double> keys;
        std::vector<std::vector<std::size_t>> strata;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = ds.cells(r, col);
            std::size_t s = keys.size();
            for (std::size_t i = 0; i < keys.size(); ++i) {
                if ((cell_missing(keys[i]) && cell_missing(v)) || keys[i] == v) {
                    s = i;
                    break;
                }
            }
            if (s == keys.size()) {
                keys.push_back(v);
                strata.emplace_back();
            }
            strata[s].push_back(r);
        }
        std::vector<std::size_t> counts;
        for (const auto& s : strata) counts.push_back(s.size());
        const auto take = detail::apportion_largest_remainder(counts, dc.split_percentage, n_train);
        for (std::size_t s = 0; s < strata.size(); ++s) {
            auto rows = strata[s];
            Rng rng(derive_seed(dc.seed, seed_domain::split, s + 1));
            rng.shuffle(rows);
            for (std::size_t i = 0; i < rows.size(); ++i) (i < take[s] ? train : test).push_back(rows[i]);
        }
    }

    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    ds.train_rows = std::move(train);
    ds.test_rows = std::move(test);
    if (log)
        log->info("split", "train=" + std::to_string(ds.train_rows.size()) +
                               " test=" + std::to_string(ds.test_rows.size()) +
                               (stratified ? " (stratified by \"" + dc.group + "\")" : ""));
    return ds;
}

/// Re-derive every categorical column's category space from training rows
/// only (first-appearance order) and remap cells. Values that never occur in
/// a training row become MISSING. Keeps fitted artifacts independent of
/// test-row contents and matches how unseen levels are treated at predict
/// time.
inline void freeze_categories_to_train(TabularDataset& ds) {
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        ColumnSchema& schema = ds.schemas[c];
        if (schema.kind != ColumnKind::categorical) continue;
        std::vector<std::string> frozen;
        std::vector<std::ptrdiff_t> remap(schema.categories.size(), -1);
        for (std::size_t r : ds.train_rows) {
            const double v = ds.cells(r, c);
            if (cell_missing(v)) continue;
            const auto old_idx = static_cast<std::size_t>(v);
            if (remap[old_idx] < 0) {
                remap[old_idx] = static_cast<std::ptrdiff_t>(frozen.size());
                frozen.push_back(schema.categories[old_idx]);
            }
        }
        for (std::size_t r = 0; r < ds.n_rows(); ++r) {
            const double v = ds.cells(r, c);
            if (cell_missing(v)) continue;
            const std::ptrdiff_t idx = remap[static_cast<std::size_t>(v)];
            ds.cells(r, c) = idx < 0 ? missing_cell() : static_cast<double>(idx);
        }
        schema.categories = std::move(frozen);
    }
}

/// Read a prediction-time file against the schema stored in a bundle.
/// Feature columns are mandatory and come back in training order; label and
/// id columns are optional; unseen categorical levels become MISSING; extra
/// columns are ignored with a logged note.
inline TabularDataset read_predict_data(const std::string& path,
                                        const std::vector<ColumnSchema>& trained, Logger* log = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto records = csv::parse_records(buf.str());
    if (records.empty()) throw DataError("data file has no header row: " + path);
    const std::vector<std::string>& header = records.front();
    for (std::size_t i = 0; i < header.size(); ++i)
        for (std::size_t j = i + 1; j < header.size(); ++j)
            if (header[i] == header[j]) throw DataError("duplicate header name \"" + header[i] + "\"");

    auto header_index = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };

    // Target column order: id first (if present), then labels (if present),
    // then features in training order.
    std::vector<std::pair<ColumnSchema, std::size_t>> selected;  // schema, source header index
    std::vector<std::string> used_names;
    for (const auto& s : trained) {
        if (s.role == ColumnRole::id || s.role == ColumnRole::label) {
            if (auto idx = header_index(s.name)) {
                selected.emplace_back(s, *idx);
                used_names.push_back(s.name);
            }
        }
    }
    for (const auto& s : trained) {
        if (s.role != ColumnRole::feature) continue;
        const auto idx = header_index(s.name);
        if (!idx) throw DataError("trained feature column \"" + s.name + "\" not found in prediction data");
        selected.emplace_back(s, *idx);
        used_names.push_back(s.name);
    }
    if (log) {
        for (const auto& h : header)
            if (std::find(used_names.begin(), used_names.end(), h) == used_names.end())
                log->info("read_predict_data", "ignoring extra column \"" + h + "\"");
    }

    const std::size_t n_rows = records.size() - 1;
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != header.size())
            throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(header.size()));

    TabularDataset ds;
    ds.cells = Matrix(n_rows, selected.size(), missing_cell());
    std::size_t unseen = 0;
    for (std::size_t c = 0; c < selected.size(); ++c) {
        const ColumnSchema& schema = selected[c].first;
        const std::size_t src = selected[c].second;
        ds.schemas.push_back(schema);
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::string& raw = records[r + 1][src];
            if (detail::is_missing_token(raw)) continue;
            if (schema.kind == ColumnKind::categorical) {
                const auto it = std::find(schema.categories.begin(), schema.categories.end(), raw);
                if (it == schema.categories.end()) {
                    ++unseen;  // unseen level: treated as missing, imputed downstream
                } else {
                    ds.cells(r, c) = static_cast<double>(it - schema.categories.begin());
                }
            } else {
                const auto v = detail::parse_decimal(raw);
                if (!v)
                    throw DataError("row " + std::to_string(r + 2) + ", column \"" + schema.name +
                                    "\": cannot parse \"" + raw + "\" as a number");
                ds.cells(r, c) = *v;
            }
        }
    }
    ds.test_rows.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) ds.test_rows[r] = r;
    if (log && unseen > 0)
        log->info("read_predict_data",
                  std::to_string(unseen) + " categorical cell(s) with unseen levels treated as missing");
    return ds;
}

}  // namespace riskpipe

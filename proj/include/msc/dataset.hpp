#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "msc/csv.hpp"
#include "msc/errors.hpp"

namespace msc {

enum class SourceKind { categorical, continuous };

inline std::string to_string(SourceKind kind) {
    return kind == SourceKind::categorical ? "categorical" : "continuous";
}

inline SourceKind source_kind_from_string(const std::string& s) {
    if (s == "categorical") return SourceKind::categorical;
    if (s == "continuous") return SourceKind::continuous;
    throw MscError(ErrorCode::invalid_argument, "unknown source kind '" + s + "'");
}

struct SourceDescriptor {
    std::string name;
    SourceKind kind = SourceKind::categorical;
    std::vector<std::string> vocabulary;     // categorical only
    std::optional<double> weight_hint;       // relative weight, defaults to uniform

    int category_index(const std::string& value) const {
        auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
        return it == vocabulary.end() ? -1 : static_cast<int>(it - vocabulary.begin());
    }
};

// One auxiliary column. Categorical values are stored as vocabulary
// indices; missing entries are flagged, never imputed.
struct AuxColumn {
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
};

struct MultiSourceDataset {
    Eigen::MatrixXd main;                    // N x d visual descriptors
    std::vector<std::string> feature_names;  // length d
    std::vector<SourceDescriptor> sources;   // length m
    std::vector<AuxColumn> aux;              // length m, each of length N
    std::vector<double> time;                // nondecreasing, seconds
    std::vector<std::string> sample_ids;     // unique, length N

    int n() const { return static_cast<int>(main.rows()); }
    int dims() const { return static_cast<int>(main.cols()); }
    int n_sources() const { return static_cast<int>(sources.size()); }

    void validate() const {
        const int N = n();
        const int d = dims();
        if (N < 2) throw MscError(ErrorCode::invalid_argument, "dataset needs N >= 2 samples");
        if (d < 1) throw MscError(ErrorCode::invalid_argument, "dataset needs d >= 1 features");
        if (static_cast<int>(feature_names.size()) != d)
            throw MscError(ErrorCode::invalid_argument, "feature name count mismatch");
        if (aux.size() != sources.size())
            throw MscError(ErrorCode::invalid_argument, "aux column / descriptor count mismatch");
        if (static_cast<int>(time.size()) != N || static_cast<int>(sample_ids.size()) != N)
            throw MscError(ErrorCode::invalid_argument, "time/id length mismatch");
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < d; ++j)
                if (!std::isfinite(main(i, j)))
                    throw MscError(ErrorCode::non_finite_value,
                                   "non-finite feature value at sample " + sample_ids[static_cast<std::size_t>(i)] +
                                       ", column " + feature_names[static_cast<std::size_t>(j)]);
        for (int i = 1; i < N; ++i)
            if (time[static_cast<std::size_t>(i)] < time[static_cast<std::size_t>(i - 1)])
                throw MscError(ErrorCode::invalid_argument,
                               "timestamps not nondecreasing at sample " + sample_ids[static_cast<std::size_t>(i)]);
        {
            std::unordered_map<std::string, int> seen;
            for (int i = 0; i < N; ++i) {
                auto [it, inserted] = seen.emplace(sample_ids[static_cast<std::size_t>(i)], i);
                if (!inserted)
                    throw MscError(ErrorCode::duplicate_id, "duplicate sample_id '" + it->first + "'");
            }
        }
        std::unordered_map<std::string, int> source_names;
        for (std::size_t j = 0; j < sources.size(); ++j) {
            const auto& src = sources[j];
            if (!source_names.emplace(src.name, 1).second)
                throw MscError(ErrorCode::duplicate_id, "duplicate source name '" + src.name + "'");
            if (src.kind == SourceKind::categorical && src.vocabulary.empty())
                throw MscError(ErrorCode::invalid_argument,
                               "categorical source '" + src.name + "' declares no vocabulary");
            if (src.kind == SourceKind::continuous && !src.vocabulary.empty())
                throw MscError(ErrorCode::invalid_argument,
                               "continuous source '" + src.name + "' must not declare a vocabulary");
            if (src.weight_hint && *src.weight_hint < 0.0)
                throw MscError(ErrorCode::invalid_argument, "negative weight_hint on '" + src.name + "'");
            const auto& col = aux[j];
            if (static_cast<int>(col.values.size()) != N || static_cast<int>(col.missing.size()) != N)
                throw MscError(ErrorCode::invalid_argument, "aux column length mismatch for '" + src.name + "'");
            for (int i = 0; i < N; ++i) {
                if (col.missing[static_cast<std::size_t>(i)]) continue;
                const double v = col.values[static_cast<std::size_t>(i)];
                if (src.kind == SourceKind::categorical) {
                    const int idx = static_cast<int>(v);
                    if (idx < 0 || idx >= static_cast<int>(src.vocabulary.size()))
                        throw MscError(ErrorCode::vocabulary_violation,
                                       "source '" + src.name + "' value out of vocabulary at sample " +
                                           sample_ids[static_cast<std::size_t>(i)]);
                } else if (!std::isfinite(v)) {
                    throw MscError(ErrorCode::non_finite_value,
                                   "non-finite value in source '" + src.name + "' at sample " +
                                       sample_ids[static_cast<std::size_t>(i)]);
                }
            }
        }
    }
};

// Per-source gain weights: alpha_v + sum(alpha_aux) + alpha_t = 1.
struct SourceWeights {
    double visual = 1.0;
    std::vector<double> aux;
    double temporal = 0.0;

    double sum() const {
        double s = visual + temporal;
        for (double a : aux) s += a;
        return s;
    }
};

// Uniform split of the non-visual mass: alpha_t = alpha_i = (1-alpha_v)/(m+1).
inline SourceWeights default_weights(double alpha_v, int m) {
    if (!(alpha_v > 0.0) || alpha_v > 1.0)
        throw MscError(ErrorCode::invalid_argument, "alpha_v must be in (0, 1]");
    if (m < 0) throw MscError(ErrorCode::invalid_argument, "m must be >= 0");
    SourceWeights w;
    w.visual = alpha_v;
    const double share = (1.0 - alpha_v) / static_cast<double>(m + 1);
    w.aux.assign(static_cast<std::size_t>(m), share);
    w.temporal = share;
    return w;
}

// Like default_weights, but an auxiliary source with a weight_hint takes a
// proportional share of the non-visual mass (temporal keeps hint 1).
inline SourceWeights base_weights(double alpha_v, const std::vector<SourceDescriptor>& sources) {
    bool any_hint = false;
    for (const auto& s : sources) any_hint = any_hint || s.weight_hint.has_value();
    if (!any_hint) return default_weights(alpha_v, static_cast<int>(sources.size()));
    if (!(alpha_v > 0.0) || alpha_v > 1.0)
        throw MscError(ErrorCode::invalid_argument, "alpha_v must be in (0, 1]");
    double total = 1.0;  // temporal
    for (const auto& s : sources) total += s.weight_hint.value_or(1.0);
    SourceWeights w;
    w.visual = alpha_v;
    w.aux.reserve(sources.size());
    for (const auto& s : sources)
        w.aux.push_back((1.0 - alpha_v) * s.weight_hint.value_or(1.0) / total);
    w.temporal = (1.0 - alpha_v) / total;
    return w;
}

// Per-source missing proportion over a sample subset (delta_i of the
// adaptive weighting rule). Duplicate indices count with multiplicity.
inline std::vector<double> missing_fractions(const MultiSourceDataset& ds, std::span<const int> subset) {
    if (subset.empty())
        throw MscError(ErrorCode::empty_input, "missing_fractions: empty subset");
    std::vector<double> out(ds.sources.size(), 0.0);
    for (std::size_t j = 0; j < ds.sources.size(); ++j) {
        long long miss = 0;
        for (int i : subset) miss += ds.aux[j].missing[static_cast<std::size_t>(i)] ? 1 : 0;
        out[j] = static_cast<double>(miss) / static_cast<double>(subset.size());
    }
    return out;
}

struct LoadReport {
    long long dropped_aux_rows = 0;  // aux rows whose sample_id is not in the main CSV
};

namespace detail {

inline bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

}  // namespace detail

// Manifest: JSON {main_csv, time_column, id_column, sources:[{name, kind,
// csv, vocabulary?, weight_hint?}]}. CSV paths are relative to the manifest.
inline MultiSourceDataset load_dataset(const std::string& manifest_path, LoadReport* report = nullptr) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw MscError(ErrorCode::io_error, "cannot open manifest " + manifest_path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw MscError(ErrorCode::invalid_argument, "bad manifest JSON: " + std::string(e.what()));
    }
    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) { return (base / p).string(); };

    const std::string main_csv = manifest.at("main_csv").get<std::string>();
    const std::string time_column = manifest.at("time_column").get<std::string>();
    const std::string id_column = manifest.at("id_column").get<std::string>();

    MultiSourceDataset ds;
    CsvTable main = read_csv(resolve(main_csv));
    if (main.header.empty() || main.header[0] != id_column)
        throw MscError(ErrorCode::malformed_csv,
                       main_csv + ": first column must be id column '" + id_column + "'");
    int time_col = -1;
    for (std::size_t c = 1; c < main.header.size(); ++c)
        if (main.header[c] == time_column) time_col = static_cast<int>(c);
    if (time_col < 0)
        throw MscError(ErrorCode::malformed_csv, main_csv + ": missing time column '" + time_column + "'");

    const int N = static_cast<int>(main.rows.size());
    const int d = static_cast<int>(main.header.size()) - 2;
    if (d < 1) throw MscError(ErrorCode::malformed_csv, main_csv + ": no feature columns");
    ds.main.resize(N, d);
    ds.time.resize(static_cast<std::size_t>(N));
    ds.sample_ids.resize(static_cast<std::size_t>(N));
    for (std::size_t c = 1; c < main.header.size(); ++c)
        if (static_cast<int>(c) != time_col) ds.feature_names.push_back(main.header[c]);

    std::unordered_map<std::string, int> id_to_row;
    id_to_row.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const auto& row = main.rows[static_cast<std::size_t>(i)];
        ds.sample_ids[static_cast<std::size_t>(i)] = row[0];
        if (!id_to_row.emplace(row[0], i).second)
            throw MscError(ErrorCode::duplicate_id, main_csv + ": duplicate sample_id '" + row[0] + "'");
        int f = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            const double v = parse_double(row[c], main_csv);
            if (static_cast<int>(c) == time_col) {
                ds.time[static_cast<std::size_t>(i)] = v;
            } else {
                if (!std::isfinite(v))
                    throw MscError(ErrorCode::non_finite_value,
                                   main_csv + ": non-finite feature for sample '" + row[0] + "'");
                ds.main(i, f++) = v;
            }
        }
    }

    LoadReport local_report;
    if (manifest.contains("sources")) {
        for (const auto& js : manifest.at("sources")) {
            SourceDescriptor src;
            src.name = js.at("name").get<std::string>();
            src.kind = source_kind_from_string(js.at("kind").get<std::string>());
            if (js.contains("vocabulary"))
                src.vocabulary = js.at("vocabulary").get<std::vector<std::string>>();
            if (js.contains("weight_hint")) src.weight_hint = js.at("weight_hint").get<double>();
            const std::string csv_path = js.at("csv").get<std::string>();
            CsvTable table = read_csv(resolve(csv_path));
            if (table.header.size() != 2)
                throw MscError(ErrorCode::malformed_csv,
                               csv_path + ": auxiliary CSV must have exactly sample_id + one value column");
            AuxColumn col;
            col.values.assign(static_cast<std::size_t>(N), 0.0);
            col.missing.assign(static_cast<std::size_t>(N), 1);
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                const auto& row = table.rows[r];
                auto it = id_to_row.find(row[0]);
                if (it == id_to_row.end()) {
                    ++local_report.dropped_aux_rows;
                    continue;
                }
                const int i = it->second;
                if (detail::is_missing_token(row[1])) continue;
                if (src.kind == SourceKind::categorical) {
                    const int idx = src.category_index(row[1]);
                    if (idx < 0)
                        throw MscError(ErrorCode::vocabulary_violation,
                                       csv_path + ":" + std::to_string(r + 2) + ": value '" + row[1] +
                                           "' not in vocabulary of source '" + src.name + "'");
                    col.values[static_cast<std::size_t>(i)] = static_cast<double>(idx);
                } else {
                    col.values[static_cast<std::size_t>(i)] = parse_double(row[1], csv_path);
                }
                col.missing[static_cast<std::size_t>(i)] = 0;
            }
            ds.sources.push_back(std::move(src));
            ds.aux.push_back(std::move(col));
        }
    }

    // Main rows arrive in file order; reorder by timestamp if needed
    // (stable, so equal timestamps keep file order).
    {
        std::vector<int> order(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return ds.time[static_cast<std::size_t>(a)] < ds.time[static_cast<std::size_t>(b)];
        });
        bool already = true;
        for (int i = 0; i < N; ++i) already = already && order[static_cast<std::size_t>(i)] == i;
        if (!already) {
            MultiSourceDataset tmp = ds;
            for (int i = 0; i < N; ++i) {
                const int s = order[static_cast<std::size_t>(i)];
                ds.main.row(i) = tmp.main.row(s);
                ds.time[static_cast<std::size_t>(i)] = tmp.time[static_cast<std::size_t>(s)];
                ds.sample_ids[static_cast<std::size_t>(i)] = tmp.sample_ids[static_cast<std::size_t>(s)];
                for (std::size_t j = 0; j < ds.aux.size(); ++j) {
                    ds.aux[j].values[static_cast<std::size_t>(i)] = tmp.aux[j].values[static_cast<std::size_t>(s)];
                    ds.aux[j].missing[static_cast<std::size_t>(i)] = tmp.aux[j].missing[static_cast<std::size_t>(s)];
                }
            }
        }
    }

    ds.validate();
    if (report) *report = local_report;
    return ds;
}

// Writes manifest + CSVs into dir; load_dataset(save_dataset(ds)) is the
// identity (doubles round-trip through shortest decimal form).
inline std::string save_dataset(const MultiSourceDataset& ds, const std::string& dir,
                                const std::string& manifest_name = "manifest.json") {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);

    {
        std::ofstream out(base / "main.csv");
        if (!out) throw MscError(ErrorCode::io_error, "cannot write main.csv in " + dir);
        std::vector<std::string> header = {"sample_id", "t"};
        header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
        write_csv_row(out, header);
        for (int i = 0; i < ds.n(); ++i) {
            std::vector<std::string> row = {ds.sample_ids[static_cast<std::size_t>(i)],
                                            format_double(ds.time[static_cast<std::size_t>(i)])};
            for (int j = 0; j < ds.dims(); ++j) row.push_back(format_double(ds.main(i, j)));
            write_csv_row(out, row);
        }
    }

    nlohmann::ordered_json manifest;
    manifest["main_csv"] = "main.csv";
    manifest["time_column"] = "t";
    manifest["id_column"] = "sample_id";
    manifest["sources"] = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < ds.sources.size(); ++j) {
        const auto& src = ds.sources[j];
        const std::string csv_name = "aux_" + src.name + ".csv";
        std::ofstream out(base / csv_name);
        if (!out) throw MscError(ErrorCode::io_error, "cannot write " + csv_name + " in " + dir);
        write_csv_row(out, {"sample_id", src.name});
        for (int i = 0; i < ds.n(); ++i) {
            std::string value;
            if (!ds.aux[j].missing[static_cast<std::size_t>(i)]) {
                const double v = ds.aux[j].values[static_cast<std::size_t>(i)];
                value = src.kind == SourceKind::categorical
                            ? src.vocabulary[static_cast<std::size_t>(static_cast<int>(v))]
                            : format_double(v);
            }
            write_csv_row(out, {ds.sample_ids[static_cast<std::size_t>(i)], value});
        }
        nlohmann::ordered_json js;
        js["name"] = src.name;
        js["kind"] = to_string(src.kind);
        js["csv"] = csv_name;
        if (src.kind == SourceKind::categorical) js["vocabulary"] = src.vocabulary;
        if (src.weight_hint) js["weight_hint"] = *src.weight_hint;
        manifest["sources"].push_back(js);
    }

    const std::string manifest_path = (base / manifest_name).string();
    std::ofstream out(manifest_path);
    if (!out) throw MscError(ErrorCode::io_error, "cannot write manifest in " + dir);
    out << manifest.dump(2) << '\n';
    return manifest_path;
}

}  // namespace msc

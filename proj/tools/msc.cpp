// msc: multi-source clustering forest pipeline
// subcommands: synth, train, cluster, tag, summarize, correlate, eval

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "msc/msc.hpp"

namespace {

using msc::Json;
using Clock = std::chrono::steady_clock;

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("MSC_LOG");
        if (!env) return LogLevel::info;
        const std::string s(env);
        if (s == "debug") return LogLevel::debug;
        if (s == "warn") return LogLevel::warn;
        if (s == "error") return LogLevel::error;
        return LogLevel::info;
    }();
    return level;
}

void log(LogLevel level, const std::string& msg) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (level >= log_level())
        std::cerr << "[msc] " << names[static_cast<int>(level)] << ": " << msg << "\n";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const Json& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(config.dump())));
    return buf;
}

// Phase timings collected into the run log; wall clock only, never part of
// model or summary artifacts.
struct RunLog {
    std::string command;
    Json config;
    Json inputs = Json::object();
    Json outputs = Json::object();
    Json extra = Json::object();
    std::vector<std::string> warnings;
    std::map<std::string, double> timings;

    void write(const std::string& primary_output) const {
        Json j;
        j["command"] = command;
        j["config"] = config;
        j["config_hash"] = config_hash(config);
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        for (auto& [k, v] : extra.items()) j[k] = v;
        j["warnings"] = warnings;
        Json jt;
        for (const auto& [phase, sec] : timings) jt[phase] = sec;
        j["timings_sec"] = jt;
        std::ofstream out(primary_output + ".runlog.json");
        if (out) out << j.dump(1) << '\n';
    }
};

struct Timer {
    RunLog& runlog;
    std::string phase;
    Clock::time_point start = Clock::now();
    Timer(RunLog& r, std::string p) : runlog(r), phase(std::move(p)) {}
    ~Timer() {
        runlog.timings[phase] =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start).count();
    }
};

int default_knn(int n) {
    const int k = std::max(10, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1);
    return std::min(k, n - 1);
}

struct TrainFlags {
    int trees = 1000;
    int mtry = 0;
    int phi = 2;
    double alpha_v = 0.5;
    int knn_k = 0;  // 0 -> max(10, ceil(log2 N) + 1)
    int kmax = 30;
    std::uint64_t seed = 0;
    int workers = 1;
    bool oblique = false;
    bool shared_pseudo = false;

    void add_to(CLI::App* cmd, bool with_pipeline = true) {
        cmd->add_option("--trees", trees, "Forest size T_clust")->check(CLI::PositiveNumber);
        cmd->add_option("--mtry", mtry, "Features per node (0 = ceil(sqrt(d)))");
        cmd->add_option("--phi", phi, "Minimum node size")->check(CLI::Range(2, 1 << 20));
        cmd->add_option("--alpha-v", alpha_v, "Visual source weight in (0,1]");
        if (with_pipeline) {
            cmd->add_option("--knn-k", knn_k, "k-NN graph degree (0 = auto)");
            cmd->add_option("--kmax", kmax, "Maximum cluster count for the eigengap search");
        }
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--oblique", oblique, "Two-feature oblique split candidates");
        cmd->add_flag("--shared-pseudo", shared_pseudo, "Share one pseudo sample set across trees");
    }

    msc::TrainConfig to_config() const {
        msc::TrainConfig cfg;
        cfg.t_clust = trees;
        cfg.m_try = mtry;
        cfg.phi = phi;
        cfg.alpha_v = alpha_v;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.oblique = oblique;
        cfg.shared_pseudo = shared_pseudo;
        return cfg;
    }

    Json to_json(int resolved_knn = -1) const {
        Json j;
        j["trees"] = trees;
        j["mtry"] = mtry;
        j["phi"] = phi;
        j["alpha_v"] = alpha_v;
        j["knn_k"] = resolved_knn >= 0 ? resolved_knn : knn_k;
        j["kmax"] = kmax;
        j["seed"] = seed;
        j["workers"] = workers;
        j["oblique"] = oblique;
        j["shared_pseudo"] = shared_pseudo;
        return j;
    }
};

// Stream id for the spectral k-means RNG, distinct from tree streams.
constexpr std::uint64_t kSpectralStream = 0x9000000000000001ull;

msc::MultiSourceDataset load_inference_input(const std::string& manifest, const msc::ModelBundle& model,
                                             RunLog& runlog) {
    Timer t(runlog, "load");
    msc::LoadReport report;
    auto ds = msc::load_dataset(manifest, &report);
    if (report.dropped_aux_rows > 0)
        runlog.warnings.push_back(std::to_string(report.dropped_aux_rows) + " unmatched auxiliary rows dropped");
    if (ds.dims() != model.forest.dims)
        throw msc::MscError(msc::ErrorCode::invalid_argument,
                            "manifest has " + std::to_string(ds.dims()) + " features, model expects " +
                                std::to_string(model.forest.dims));
    return ds;
}

template <class Fn>
void parallel_over_samples(int n, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

int cmd_synth(const msc::SynthConfig& cfg, const std::string& out_dir) {
    RunLog runlog;
    runlog.command = "synth";
    Json jc;
    jc["n_clusters"] = cfg.n_clusters;
    jc["samples_per_cluster"] = cfg.samples_per_cluster;
    jc["d"] = cfg.d;
    jc["blob_separation"] = cfg.blob_separation;
    jc["blob_sigma"] = cfg.blob_sigma;
    jc["n_categorical"] = cfg.n_categorical;
    jc["align_prob"] = cfg.align_prob;
    jc["n_continuous"] = cfg.n_continuous;
    jc["cont_shift"] = cfg.cont_shift;
    jc["cont_sigma"] = cfg.cont_sigma;
    jc["missing_fraction"] = cfg.missing_fraction;
    jc["temporal_blocks"] = cfg.temporal_blocks;
    jc["seed"] = cfg.seed;
    runlog.config = jc;

    std::string manifest;
    {
        Timer t(runlog, "generate");
        const auto synth = msc::generate(cfg);
        manifest = msc::write_synth(synth, out_dir);
    }
    runlog.outputs["manifest"] = manifest;
    runlog.write(manifest);
    log(LogLevel::info, "wrote " + manifest);
    return 0;
}

int cmd_train(const std::string& manifest, const std::string& out, const TrainFlags& flags,
              const std::string& affinity_csv) {
    RunLog runlog;
    runlog.command = "train";
    runlog.inputs["manifest"] = manifest;

    msc::MultiSourceDataset ds;
    {
        Timer t(runlog, "load");
        msc::LoadReport report;
        ds = msc::load_dataset(manifest, &report);
        if (report.dropped_aux_rows > 0)
            runlog.warnings.push_back(std::to_string(report.dropped_aux_rows) +
                                      " unmatched auxiliary rows dropped");
    }
    const int knn_k = flags.knn_k > 0 ? std::min(flags.knn_k, ds.n() - 1) : default_knn(ds.n());
    runlog.config = flags.to_json(knn_k);
    log(LogLevel::info, "training on N=" + std::to_string(ds.n()) + " d=" + std::to_string(ds.dims()) +
                            " m=" + std::to_string(ds.n_sources()));

    msc::MscForest forest;
    {
        Timer t(runlog, "train_forest");
        forest = msc::train_forest(ds, flags.to_config());
    }
    const auto fan_in = msc::fan_in_stats(forest, ds.main);
    runlog.extra["phi_star"] = fan_in.mean;
    runlog.extra["phi_per_tree"] = fan_in.per_tree;
    runlog.extra["path_length_hist"] = fan_in.path_length_hist;

    msc::AffinityMatrix affinity;
    {
        Timer t(runlog, "affinity");
        affinity = msc::forest_affinity(forest, ds.main, flags.workers);
    }
    if (!affinity_csv.empty()) {
        std::ofstream csv(affinity_csv);
        if (!csv) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + affinity_csv);
        msc::export_affinity_csv(affinity, csv);
        runlog.outputs["affinity_csv"] = affinity_csv;
    }

    std::vector<int> labels;
    int k = 0;
    {
        Timer t(runlog, "spectral");
        const auto s = msc::normalise(msc::knn_sparsify(affinity, knn_k));
        k = msc::estimate_num_clusters(s, std::min(flags.kmax, ds.n() - 1));
        msc::Rng rng = msc::make_rng(msc::derive_seed(flags.seed, kSpectralStream));
        labels = msc::spectral_cluster(s, k, rng);
    }
    log(LogLevel::info, "discovered K=" + std::to_string(k) + " clusters");

    msc::ModelBundle bundle;
    {
        Timer t(runlog, "cluster_model");
        bundle.forest = std::move(forest);
        bundle.clusters = msc::build_cluster_model(ds, labels);
        bundle.sources = ds.sources;
        bundle.feature_names = ds.feature_names;
    }
    {
        Timer t(runlog, "save");
        Json pipeline;
        pipeline["knn_k"] = knn_k;
        pipeline["kmax"] = flags.kmax;
        pipeline["num_clusters"] = k;
        msc::save_model(bundle, out, &pipeline);
    }
    runlog.extra["num_clusters"] = k;
    runlog.outputs["model"] = out;
    runlog.write(out);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_assign(const std::string& command, const std::string& model_path, const std::string& manifest,
               const std::string& out, int workers, bool with_tags) {
    RunLog runlog;
    runlog.command = command;
    runlog.inputs["model"] = model_path;
    runlog.inputs["manifest"] = manifest;

    msc::ModelBundle model;
    {
        Timer t(runlog, "load_model");
        model = msc::load_model(model_path);
    }
    Json jc;
    jc["workers"] = workers;
    jc["seed"] = model.forest.config.seed;
    runlog.config = jc;
    const auto ds = load_inference_input(manifest, model, runlog);

    std::vector<Json> lines(static_cast<std::size_t>(ds.n()));
    {
        Timer t(runlog, "inference");
        parallel_over_samples(ds.n(), workers, [&](int i) {
            const auto x = ds.main.row(i).transpose();
            const auto assignment = msc::assign_cluster(model.forest, model.clusters, x);
            Json j;
            j["sample_id"] = ds.sample_ids[static_cast<std::size_t>(i)];
            j["cluster"] = assignment.cluster;
            j["votes"] = assignment.votes;
            if (with_tags) {
                const auto tags = msc::infer_tags_from_votes(model.clusters, assignment.per_tree);
                j["tags"] = msc::tags_to_json(tags, model.sources, model.clusters);
            }
            lines[static_cast<std::size_t>(i)] = std::move(j);
        });
    }
    {
        Timer t(runlog, "write");
        std::ofstream os(out, std::ios::binary);
        if (!os) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + out);
        for (const auto& j : lines) os << j.dump() << '\n';
    }
    runlog.outputs["predictions"] = out;
    runlog.write(out);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_summarize(const std::string& model_path, const std::string& manifest, const std::string& out,
                  const std::string& svg_path, int knn_k_flag, int workers) {
    RunLog runlog;
    runlog.command = "summarize";
    runlog.inputs["model"] = model_path;
    runlog.inputs["manifest"] = manifest;

    msc::ModelBundle model;
    {
        Timer t(runlog, "load_model");
        model = msc::load_model(model_path);
    }
    const auto ds = load_inference_input(manifest, model, runlog);
    const int knn_k = knn_k_flag > 0 ? std::min(knn_k_flag, ds.n() - 1) : default_knn(ds.n());
    // Worker count is run-log material, never part of the summary identity.
    Json jc;
    jc["knn_k"] = knn_k;
    jc["seed"] = model.forest.config.seed;
    runlog.config = jc;
    runlog.config["workers"] = workers;

    std::vector<msc::Assignment> assignments(static_cast<std::size_t>(ds.n()));
    std::vector<msc::TagPrediction> tags(static_cast<std::size_t>(ds.n()));
    {
        Timer t(runlog, "inference");
        parallel_over_samples(ds.n(), workers, [&](int i) {
            const auto x = ds.main.row(i).transpose();
            auto assignment = msc::assign_cluster(model.forest, model.clusters, x);
            assignment.sample_id = ds.sample_ids[static_cast<std::size_t>(i)];
            tags[static_cast<std::size_t>(i)] =
                msc::infer_tags_from_votes(model.clusters, assignment.per_tree);
            assignments[static_cast<std::size_t>(i)] = std::move(assignment);
        });
    }

    msc::KeyClipResult keyclips;
    {
        Timer t(runlog, "keyclips");
        const auto affinity = msc::forest_affinity(model.forest, ds.main, workers);
        const auto graph = msc::knn_sparsify(affinity, knn_k);
        const auto reps = msc::representatives(assignments, ds.main);
        keyclips = msc::keyclip_paths(graph, reps);
        if (keyclips.unreachable_pairs > 0) {
            runlog.warnings.push_back(std::to_string(keyclips.unreachable_pairs) +
                                      " representative pairs unreachable on the k-NN graph");
            log(LogLevel::warn, runlog.warnings.back());
        }
    }

    {
        Timer t(runlog, "compose");
        const auto manifest_out =
            msc::compose_summary(keyclips.clips, assignments, tags, ds.time, ds.sample_ids);
        const auto j = msc::summary_to_json(manifest_out, model.sources, model.clusters, jc);
        std::ofstream os(out, std::ios::binary);
        if (!os) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + out);
        os << j.dump(1) << '\n';
        if (!svg_path.empty()) {
            std::ofstream svg(svg_path, std::ios::binary);
            if (!svg) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + svg_path);
            svg << msc::timeline_svg(manifest_out);
            runlog.outputs["svg"] = svg_path;
        }
        runlog.extra["summary_length"] = static_cast<int>(manifest_out.clips.size());
    }
    runlog.outputs["summary"] = out;
    runlog.write(out);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_correlate(const std::string& manifest, const std::string& out, const std::string& pairs_json,
                  const TrainFlags& flags, bool symmetric, bool exclude_empty_trees) {
    RunLog runlog;
    runlog.command = "correlate";
    runlog.inputs["manifest"] = manifest;
    runlog.config = flags.to_json();
    runlog.config["symmetric"] = symmetric;

    msc::MultiSourceDataset ds;
    {
        Timer t(runlog, "load");
        ds = msc::load_dataset(manifest);
    }
    msc::MscForest forest;
    {
        Timer t(runlog, "train_forest");
        auto cfg = flags.to_config();
        cfg.log_correlation = true;
        forest = msc::train_forest(ds, cfg);
    }
    msc::CorrelationReport report;
    {
        Timer t(runlog, "aggregate");
        report = msc::build_correlation_report(forest.correlation, ds.dims(), ds.n_sources(),
                                               !exclude_empty_trees);
    }

    {
        Timer t(runlog, "write");
        std::ofstream csv(out, std::ios::binary);
        if (!csv) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + out);
        const Eigen::MatrixXd psi = symmetric ? msc::symmetrised_psi(report) : report.psi;
        csv << "source";
        std::vector<std::string> names = {"main"};
        for (const auto& src : ds.sources) names.push_back(src.name);
        for (const auto& n : names) csv << ',' << n;
        csv << '\n';
        for (int i = 0; i < psi.rows(); ++i) {
            csv << names[static_cast<std::size_t>(i)];
            for (int j = 0; j < psi.cols(); ++j) csv << ',' << msc::format_double(psi(i, j));
            csv << '\n';
        }

        if (!pairs_json.empty()) {
            std::vector<std::tuple<double, int, int>> pairs;
            for (int a = 0; a < ds.dims(); ++a)
                for (int b = 0; b < ds.dims(); ++b)
                    if (a != b && report.lambda_vv(a, b) > 0.0)
                        pairs.emplace_back(report.lambda_vv(a, b), a, b);
            std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
                if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
                if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
                return std::get<2>(x) < std::get<2>(y);
            });
            Json top = Json::array();
            for (std::size_t i = 0; i < pairs.size() && i < 20; ++i) {
                Json jp;
                jp["feature"] = ds.feature_names[static_cast<std::size_t>(std::get<1>(pairs[i]))];
                jp["other"] = ds.feature_names[static_cast<std::size_t>(std::get<2>(pairs[i]))];
                jp["lambda"] = std::get<0>(pairs[i]);
                jp["co_occurrences"] = report.counts_vv(std::get<1>(pairs[i]), std::get<2>(pairs[i]));
                top.push_back(std::move(jp));
            }
            Json jv;
            jv["top_feature_pairs"] = top;
            Json va = Json::array();
            for (int j = 0; j < ds.n_sources(); ++j) {
                Json js;
                js["source"] = ds.sources[static_cast<std::size_t>(j)].name;
                js["psi_main"] = report.psi(0, j + 1);
                va.push_back(std::move(js));
            }
            jv["visual_aux"] = va;
            std::ofstream pj(pairs_json, std::ios::binary);
            if (!pj) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + pairs_json);
            pj << jv.dump(1) << '\n';
            runlog.outputs["pairs_json"] = pairs_json;
        }
    }
    runlog.outputs["psi_csv"] = out;
    runlog.write(out);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& predictions, const std::string& truth_csv,
             const std::string& coverage_json, const std::string& out) {
    RunLog runlog;
    runlog.command = "eval";
    runlog.inputs["model"] = model_path;
    runlog.inputs["predictions"] = predictions;
    runlog.inputs["truth"] = truth_csv;
    runlog.config = Json::object();

    msc::ModelBundle model;
    {
        Timer t(runlog, "load_model");
        model = msc::load_model(model_path);
    }

    // Predictions JSONL as written by `tag`.
    std::vector<std::string> ids;
    std::map<std::string, std::vector<std::string>> predicted;  // source -> per-sample argmax
    {
        Timer t(runlog, "load_predictions");
        std::ifstream in(predictions);
        if (!in) throw msc::MscError(msc::ErrorCode::io_error, "cannot open " + predictions);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            Json j;
            try {
                j = Json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw msc::MscError(msc::ErrorCode::invalid_argument,
                                    "bad predictions line: " + std::string(e.what()));
            }
            ids.push_back(j.at("sample_id").get<std::string>());
            for (const auto& src : model.sources) {
                if (src.kind != msc::SourceKind::categorical) continue;
                predicted[src.name].push_back(
                    j.at("tags").at(src.name).at("argmax").get<std::string>());
            }
        }
    }
    if (ids.empty()) throw msc::MscError(msc::ErrorCode::empty_input, "no predictions in " + predictions);

    // Truth CSV: sample_id plus one column per categorical source.
    std::map<std::string, std::unordered_map<std::string, int>> truth;  // source -> id -> class
    {
        Timer t(runlog, "load_truth");
        const auto table = msc::read_csv(truth_csv);
        if (table.header.empty() || table.header[0] != "sample_id")
            throw msc::MscError(msc::ErrorCode::malformed_csv, truth_csv + ": first column must be sample_id");
        for (std::size_t c = 1; c < table.header.size(); ++c) {
            const std::string& name = table.header[c];
            const msc::SourceDescriptor* src = nullptr;
            for (const auto& s : model.sources)
                if (s.name == name) src = &s;
            if (!src || src->kind != msc::SourceKind::categorical) continue;
            auto& by_id = truth[name];
            for (const auto& row : table.rows) {
                const int idx = src->category_index(row[c]);
                if (idx < 0)
                    throw msc::MscError(msc::ErrorCode::vocabulary_violation,
                                        truth_csv + ": value '" + row[c] + "' not in vocabulary of '" +
                                            name + "'");
                by_id[row[0]] = idx;
            }
        }
    }

    Json report;
    report["samples"] = static_cast<int>(ids.size());
    Json per_source = Json::object();
    {
        Timer t(runlog, "score");
        for (std::size_t s = 0; s < model.sources.size(); ++s) {
            const auto& src = model.sources[s];
            if (src.kind != msc::SourceKind::categorical) continue;
            if (!truth.count(src.name)) continue;
            std::vector<int> pred_idx;
            pred_idx.reserve(ids.size());
            for (const auto& label : predicted.at(src.name)) {
                const int idx = src.category_index(label);
                if (idx < 0)
                    throw msc::MscError(msc::ErrorCode::vocabulary_violation,
                                        "predicted label '" + label + "' not in vocabulary of '" +
                                            src.name + "'");
                pred_idx.push_back(idx);
            }
            const auto acc = msc::tagging_accuracy(ids, pred_idx, truth.at(src.name),
                                                   static_cast<int>(src.vocabulary.size()));
            Json js;
            js["accuracy"] = acc.accuracy;
            js["confusion"] = acc.confusion;
            Json recall = Json::array();
            for (std::size_t c = 0; c < acc.confusion.size(); ++c) {
                long long row_total = 0;
                for (long long v : acc.confusion[c]) row_total += v;
                recall.push_back(row_total > 0
                                     ? static_cast<double>(acc.confusion[c][c]) / static_cast<double>(row_total)
                                     : 0.0);
            }
            js["recall"] = std::move(recall);
            js["mean_entropy"] = msc::mean_entropy(model.clusters, static_cast<int>(s));
            per_source[src.name] = std::move(js);
        }
    }
    report["per_source"] = per_source;

    // Optional summary-coverage scoring: JSON with the lengths of all
    // compared summaries and per-method covered-event counts.
    if (!coverage_json.empty()) {
        runlog.inputs["coverage"] = coverage_json;
        std::ifstream in(coverage_json);
        if (!in) throw msc::MscError(msc::ErrorCode::io_error, "cannot open " + coverage_json);
        Json spec;
        try {
            in >> spec;
        } catch (const nlohmann::json::exception& e) {
            throw msc::MscError(msc::ErrorCode::invalid_argument,
                                "bad coverage JSON: " + std::string(e.what()));
        }
        const long long total = spec.at("total_events").get<long long>();
        std::vector<double> lengths;
        for (const auto& method : spec.at("methods"))
            lengths.push_back(method.at("length").get<double>());
        Json jcov = Json::object();
        std::size_t at = 0;
        for (const auto& method : spec.at("methods")) {
            const double c = msc::coverage(lengths, lengths[at++],
                                           method.at("covered").get<long long>(), total);
            jcov[method.at("name").get<std::string>()] = c;
        }
        report["coverage"] = std::move(jcov);
    }

    report["seed"] = model.forest.config.seed;
    report["model_config_hash"] = config_hash(model_to_json(model)["config"]);

    std::ofstream os(out, std::ios::binary);
    if (!os) throw msc::MscError(msc::ErrorCode::io_error, "cannot write " + out);
    os << report.dump(1) << '\n';
    runlog.outputs["report"] = out;
    runlog.write(out);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source clustering forest pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a planted multi-source dataset");
    msc::SynthConfig synth_cfg;
    std::string synth_out;
    bool shuffle_time = false;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--clusters", synth_cfg.n_clusters, "Latent cluster count");
    synth->add_option("--per-cluster", synth_cfg.samples_per_cluster, "Samples per cluster");
    synth->add_option("--dims", synth_cfg.d, "Main feature dimension");
    synth->add_option("--separation", synth_cfg.blob_separation, "Blob center separation");
    synth->add_option("--sigma", synth_cfg.blob_sigma, "Blob standard deviation");
    synth->add_option("--categorical", synth_cfg.n_categorical, "Categorical source count");
    synth->add_option("--align", synth_cfg.align_prob, "Categorical alignment probability");
    synth->add_option("--continuous", synth_cfg.n_continuous, "Continuous source count");
    synth->add_option("--cont-shift", synth_cfg.cont_shift, "Continuous per-cluster mean shift");
    synth->add_option("--cont-sigma", synth_cfg.cont_sigma, "Continuous noise sigma");
    synth->add_option("--missing", synth_cfg.missing_fraction, "Missing fraction per auxiliary entry");
    synth->add_flag("--shuffle-time", shuffle_time, "Shuffle clusters over the timeline");
    synth->add_option("--seed", synth_cfg.seed, "RNG seed");

    // train
    auto* train = app.add_subcommand("train", "Train forest + clusters, write a model file");
    std::string train_manifest, train_out, train_affinity_csv;
    TrainFlags train_flags;
    train->add_option("--manifest", train_manifest, "Dataset manifest")->required();
    train->add_option("--out", train_out, "Model output path")->required();
    train->add_option("--affinity-csv", train_affinity_csv, "Optional affinity coordinate-list export");
    train_flags.add_to(train);

    // cluster / tag
    auto* cluster = app.add_subcommand("cluster", "Assign unseen samples to training clusters");
    auto* tag = app.add_subcommand("tag", "Assign clusters and infer auxiliary tags");
    std::string inf_model, inf_manifest, inf_out;
    int inf_workers = 1;
    for (auto* cmd : {cluster, tag}) {
        cmd->add_option("--model", inf_model, "Trained model file")->required();
        cmd->add_option("--manifest", inf_manifest, "Unseen dataset manifest")->required();
        cmd->add_option("--out", inf_out, "Output JSONL path")->required();
        cmd->add_option("--workers", inf_workers, "Worker threads")->check(CLI::PositiveNumber);
    }

    // summarize
    auto* summarize = app.add_subcommand("summarize", "Emit a key-clip summary manifest + timeline SVG");
    std::string sum_model, sum_manifest, sum_out, sum_svg;
    int sum_knn = 0, sum_workers = 1;
    summarize->add_option("--model", sum_model, "Trained model file")->required();
    summarize->add_option("--manifest", sum_manifest, "Unseen dataset manifest")->required();
    summarize->add_option("--out", sum_out, "Summary JSON path")->required();
    summarize->add_option("--svg", sum_svg, "Timeline SVG path (default: <out>.svg)");
    summarize->add_option("--knn-k", sum_knn, "k-NN graph degree (0 = auto)");
    summarize->add_option("--workers", sum_workers, "Worker threads")->check(CLI::PositiveNumber);

    // correlate
    auto* correlate = app.add_subcommand("correlate", "Train with correlation logging, export psi");
    std::string cor_manifest, cor_out, cor_pairs;
    TrainFlags cor_flags;
    bool cor_symmetric = false, cor_exclude_empty = false;
    correlate->add_option("--manifest", cor_manifest, "Dataset manifest")->required();
    correlate->add_option("--out", cor_out, "psi CSV output path")->required();
    correlate->add_option("--pairs-json", cor_pairs, "Top feature-pair JSON output");
    correlate->add_flag("--symmetric", cor_symmetric, "Export (psi + psi^T) / 2");
    correlate->add_flag("--exclude-empty-trees", cor_exclude_empty,
                        "Average per-pair over contributing trees only");
    cor_flags.add_to(correlate, false);

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string eval_model, eval_pred, eval_truth, eval_cov, eval_out;
    eval->add_option("--model", eval_model, "Trained model file")->required();
    eval->add_option("--predictions", eval_pred, "Predictions JSONL from `tag`")->required();
    eval->add_option("--truth", eval_truth, "Ground truth CSV (sample_id + one column per source)")
        ->required();
    eval->add_option("--coverage", eval_cov,
                     "Summary coverage JSON {total_events, methods:[{name,length,covered}]}");
    eval->add_option("--out", eval_out, "Report JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors belong to the validation family
    }

    try {
        if (*synth) {
            synth_cfg.temporal_blocks = !shuffle_time;
            return cmd_synth(synth_cfg, synth_out);
        }
        if (*train) return cmd_train(train_manifest, train_out, train_flags, train_affinity_csv);
        if (*cluster) return cmd_assign("cluster", inf_model, inf_manifest, inf_out, inf_workers, false);
        if (*tag) return cmd_assign("tag", inf_model, inf_manifest, inf_out, inf_workers, true);
        if (*summarize) {
            if (sum_svg.empty()) sum_svg = sum_out + ".svg";
            return cmd_summarize(sum_model, sum_manifest, sum_out, sum_svg, sum_knn, sum_workers);
        }
        if (*correlate)
            return cmd_correlate(cor_manifest, cor_out, cor_pairs, cor_flags, cor_symmetric,
                                 cor_exclude_empty);
        if (*eval) return cmd_eval(eval_model, eval_pred, eval_truth, eval_cov, eval_out);
    } catch (const msc::MscError& e) {
        log(LogLevel::error, e.what());
        return msc::exit_code_for(e.family());
    } catch (const std::exception& e) {
        log(LogLevel::error, std::string("internal: ") + e.what());
        return 1;
    }
    return 0;
}

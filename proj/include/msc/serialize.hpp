#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msc/csv.hpp"
#include "msc/dataset.hpp"
#include "msc/errors.hpp"
#include "msc/forest.hpp"
#include "msc/spectral.hpp"
#include "msc/summary.hpp"

namespace msc {

using Json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "msc-forest-model";
inline constexpr int kModelVersion = 1;

// Everything inference and summarisation need: the forest, the training
// cluster model, and the source/feature metadata of the training data.
struct ModelBundle {
    MscForest forest;
    ClusterModel clusters;
    std::vector<SourceDescriptor> sources;
    std::vector<std::string> feature_names;
};

namespace detail {

inline Json node_to_json(const Tree& tree, int index) {
    const auto& node = tree.nodes[static_cast<std::size_t>(index)];
    Json j;
    if (node.is_leaf()) {
        j["members"] = node.members;
        return j;
    }
    Json split;
    split["feature"] = node.split.feature;
    split["threshold"] = node.split.threshold;
    if (node.split.feature2 >= 0) {
        split["feature2"] = node.split.feature2;
        split["w1"] = node.split.w1;
        split["w2"] = node.split.w2;
    }
    j["split"] = std::move(split);
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
    return j;
}

inline int node_from_json(const Json& j, Tree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("members")) {
        tree.nodes[static_cast<std::size_t>(index)].members = j.at("members").get<std::vector<int>>();
        return index;
    }
    SplitParams split;
    const auto& js = j.at("split");
    split.feature = js.at("feature").get<int>();
    split.threshold = js.at("threshold").get<double>();
    if (js.contains("feature2")) {
        split.feature2 = js.at("feature2").get<int>();
        split.w1 = js.at("w1").get<double>();
        split.w2 = js.at("w2").get<double>();
    }
    tree.nodes[static_cast<std::size_t>(index)].split = split;
    const int left = node_from_json(j.at("left"), tree);
    const int right = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
}

inline Json weights_to_json(const SourceWeights& w) {
    return Json{{"visual", w.visual}, {"aux", w.aux}, {"temporal", w.temporal}};
}

inline SourceWeights weights_from_json(const Json& j) {
    SourceWeights w;
    w.visual = j.at("visual").get<double>();
    w.aux = j.at("aux").get<std::vector<double>>();
    w.temporal = j.at("temporal").get<double>();
    return w;
}

}  // namespace detail

inline Json model_to_json(const ModelBundle& bundle) {
    Json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;

    const auto& cfg = bundle.forest.config;
    Json jc;
    jc["t_clust"] = cfg.t_clust;
    jc["m_try"] = cfg.m_try;
    jc["phi"] = cfg.phi;
    jc["alpha_v"] = cfg.alpha_v;
    jc["seed"] = cfg.seed;
    jc["oblique"] = cfg.oblique;
    jc["shared_pseudo"] = cfg.shared_pseudo;
    if (cfg.weights_override) jc["weights_override"] = detail::weights_to_json(*cfg.weights_override);
    j["config"] = std::move(jc);

    Json jd;
    jd["n"] = bundle.forest.n_samples;
    jd["d"] = bundle.forest.dims;
    jd["feature_names"] = bundle.feature_names;
    jd["sources"] = Json::array();
    for (const auto& src : bundle.sources) {
        Json js;
        js["name"] = src.name;
        js["kind"] = to_string(src.kind);
        if (src.kind == SourceKind::categorical) js["vocabulary"] = src.vocabulary;
        if (src.weight_hint) js["weight_hint"] = *src.weight_hint;
        jd["sources"].push_back(std::move(js));
    }
    j["data"] = std::move(jd);

    j["trees"] = Json::array();
    for (const auto& tree : bundle.forest.trees) {
        Json jt;
        jt["weights"] = detail::weights_to_json(tree.weights);
        jt["roots"] = Json{{"visual", tree.roots.visual},
                           {"aux", tree.roots.aux},
                           {"temporal", tree.roots.temporal}};
        jt["fan_in"] = tree.fan_in;
        jt["root"] = detail::node_to_json(tree, 0);
        j["trees"].push_back(std::move(jt));
    }

    Json jk;
    jk["labels"] = bundle.clusters.labels;
    jk["sizes"] = bundle.clusters.cluster_sizes;
    jk["centroids"] = Json::array();
    for (int c = 0; c < bundle.clusters.num_clusters(); ++c) {
        Json row = Json::array();
        for (int f = 0; f < static_cast<int>(bundle.clusters.centroids.cols()); ++f)
            row.push_back(bundle.clusters.centroids(c, f));
        jk["centroids"].push_back(std::move(row));
    }
    jk["profiles"] = Json::array();
    for (const auto& per_source : bundle.clusters.tag_profiles) {
        Json row = Json::array();
        for (const auto& profile : per_source) {
            Json jp;
            jp["probs"] = profile.probs;
            jp["uniform_fallback"] = profile.uniform_fallback;
            jp["mean"] = profile.mean;
            jp["bin_lo"] = profile.bin_lo;
            jp["bin_width"] = profile.bin_width;
            row.push_back(std::move(jp));
        }
        jk["profiles"].push_back(std::move(row));
    }
    j["clusters"] = std::move(jk);
    return j;
}

inline ModelBundle model_from_json(const Json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormat)
        throw MscError(ErrorCode::invalid_argument, "not a model file");
    if (j.at("version").get<int>() != kModelVersion)
        throw MscError(ErrorCode::invalid_argument, "unsupported model version");

    ModelBundle bundle;
    const auto& jc = j.at("config");
    auto& cfg = bundle.forest.config;
    cfg.t_clust = jc.at("t_clust").get<int>();
    cfg.m_try = jc.at("m_try").get<int>();
    cfg.phi = jc.at("phi").get<int>();
    cfg.alpha_v = jc.at("alpha_v").get<double>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();
    cfg.oblique = jc.at("oblique").get<bool>();
    cfg.shared_pseudo = jc.at("shared_pseudo").get<bool>();
    if (jc.contains("weights_override"))
        cfg.weights_override = detail::weights_from_json(jc.at("weights_override"));

    const auto& jd = j.at("data");
    bundle.forest.n_samples = jd.at("n").get<int>();
    bundle.forest.dims = jd.at("d").get<int>();
    bundle.feature_names = jd.at("feature_names").get<std::vector<std::string>>();
    for (const auto& js : jd.at("sources")) {
        SourceDescriptor src;
        src.name = js.at("name").get<std::string>();
        src.kind = source_kind_from_string(js.at("kind").get<std::string>());
        if (js.contains("vocabulary")) src.vocabulary = js.at("vocabulary").get<std::vector<std::string>>();
        if (js.contains("weight_hint")) src.weight_hint = js.at("weight_hint").get<double>();
        bundle.sources.push_back(std::move(src));
    }

    for (const auto& jt : j.at("trees")) {
        Tree tree;
        tree.weights = detail::weights_from_json(jt.at("weights"));
        tree.roots.visual = jt.at("roots").at("visual").get<double>();
        tree.roots.aux = jt.at("roots").at("aux").get<std::vector<double>>();
        tree.roots.temporal = jt.at("roots").at("temporal").get<double>();
        tree.fan_in = jt.at("fan_in").get<long long>();
        detail::node_from_json(jt.at("root"), tree);
        bundle.forest.trees.push_back(std::move(tree));
    }

    const auto& jk = j.at("clusters");
    bundle.clusters.labels = jk.at("labels").get<std::vector<int>>();
    bundle.clusters.cluster_sizes = jk.at("sizes").get<std::vector<int>>();
    const auto& rows = jk.at("centroids");
    const int k = static_cast<int>(rows.size());
    const int d = k > 0 ? static_cast<int>(rows[0].size()) : bundle.forest.dims;
    bundle.clusters.centroids.resize(k, d);
    for (int c = 0; c < k; ++c)
        for (int f = 0; f < d; ++f) bundle.clusters.centroids(c, f) = rows[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)].get<double>();
    for (const auto& row : jk.at("profiles")) {
        std::vector<TagProfile> per_source;
        for (const auto& jp : row) {
            TagProfile profile;
            profile.probs = jp.at("probs").get<std::vector<double>>();
            profile.uniform_fallback = jp.at("uniform_fallback").get<bool>();
            profile.mean = jp.at("mean").get<double>();
            profile.bin_lo = jp.at("bin_lo").get<double>();
            profile.bin_width = jp.at("bin_width").get<double>();
            per_source.push_back(std::move(profile));
        }
        bundle.clusters.tag_profiles.push_back(std::move(per_source));
    }
    return bundle;
}

inline void save_model(const ModelBundle& bundle, const std::string& path, const Json* pipeline = nullptr) {
    Json j = model_to_json(bundle);
    if (pipeline) j["pipeline"] = *pipeline;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MscError(ErrorCode::io_error, "cannot write model file " + path);
    out << j.dump(1) << '\n';
}

inline ModelBundle load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MscError(ErrorCode::io_error, "cannot open model file " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MscError(ErrorCode::invalid_argument, "bad model JSON: " + std::string(e.what()));
    }
    return model_from_json(j);
}

// Per-source tag block {argmax, distribution}; categorical argmax resolves
// to the vocabulary label, continuous to the bin centre value.
inline Json tags_to_json(const TagPrediction& tags, const std::vector<SourceDescriptor>& sources,
                         const ClusterModel& model) {
    Json j;
    for (std::size_t s = 0; s < sources.size(); ++s) {
        Json js;
        const int arg = tags.argmax[s];
        if (sources[s].kind == SourceKind::categorical) {
            js["argmax"] = sources[s].vocabulary[static_cast<std::size_t>(arg)];
        } else {
            const auto& profile = model.tag_profiles.front()[s];
            js["argmax"] = profile.bin_lo + (static_cast<double>(arg) + 0.5) * profile.bin_width;
        }
        js["distribution"] = tags.distributions[s];
        j[sources[s].name] = std::move(js);
    }
    return j;
}

inline Json summary_to_json(const SummaryManifest& manifest, const std::vector<SourceDescriptor>& sources,
                            const ClusterModel& model, const Json& config) {
    Json j;
    j["clips"] = Json::array();
    for (const auto& clip : manifest.clips) {
        Json jc;
        jc["id"] = clip.id;
        jc["t"] = clip.t;
        jc["cluster"] = clip.cluster;
        jc["typicality"] = clip.typicality == Typicality::interesting ? "INTERESTING" : "USUAL";
        jc["tags"] = tags_to_json(clip.tags, sources, model);
        j["clips"].push_back(std::move(jc));
    }
    j["config"] = config;
    return j;
}

// Timeline figure: one lane per cluster, one mark per key clip, interesting
// clips highlighted.
inline std::string timeline_svg(const SummaryManifest& manifest) {
    double t_min = 0.0, t_max = 1.0;
    int max_cluster = 0;
    if (!manifest.clips.empty()) {
        t_min = manifest.clips.front().t;
        t_max = manifest.clips.back().t;
        for (const auto& c : manifest.clips) max_cluster = std::max(max_cluster, c.cluster);
    }
    if (t_max <= t_min) t_max = t_min + 1.0;
    const double width = 900.0, lane = 24.0, margin = 40.0;
    const double height = margin * 2 + lane * static_cast<double>(max_cluster + 1);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int c = 0; c <= max_cluster; ++c) {
        const double y = margin + lane * static_cast<double>(c);
        svg << "<line x1=\"" << margin << "\" y1=\"" << y << "\" x2=\"" << (width - margin) << "\" y2=\""
            << y << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"4\" y=\"" << (y + 4) << "\" font-size=\"11\">c" << c << "</text>\n";
    }
    for (const auto& clip : manifest.clips) {
        const double x = margin + (width - 2 * margin) * (clip.t - t_min) / (t_max - t_min);
        const double y = margin + lane * static_cast<double>(clip.cluster);
        const bool hot = clip.typicality == Typicality::interesting;
        svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << (hot ? 6 : 4) << "\" fill=\""
            << (hot ? "#d62728" : "#1f77b4") << "\"><title>" << clip.id << "</title></circle>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace msc

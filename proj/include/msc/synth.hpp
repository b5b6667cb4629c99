#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "msc/dataset.hpp"
#include "msc/errors.hpp"
#include "msc/random.hpp"

namespace msc {

// Planted multi-source benchmark: isotropic blobs at scaled orthant
// corners, auxiliary sources aligned with the latent cluster, optional
// temporal block structure and uniform missingness.
struct SynthConfig {
    int n_clusters = 4;
    int samples_per_cluster = 50;
    int d = 8;
    double blob_separation = 10.0;
    double blob_sigma = 1.0;
    int n_categorical = 1;
    double align_prob = 0.9;       // P(categorical value == latent cluster)
    int n_continuous = 0;
    double cont_shift = 1.0;       // per-cluster mean shift
    double cont_sigma = 0.1;
    double missing_fraction = 0.0; // applied per auxiliary entry
    bool temporal_blocks = true;   // contiguous time block per cluster
    std::uint64_t seed = 0;

    void validate() const {
        if (n_clusters < 2) throw MscError(ErrorCode::invalid_argument, "synth: n_clusters must be >= 2");
        if (samples_per_cluster < 1)
            throw MscError(ErrorCode::invalid_argument, "synth: samples_per_cluster must be >= 1");
        if (d < 1) throw MscError(ErrorCode::invalid_argument, "synth: d must be >= 1");
        const int need_bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(n_clusters))));
        if (d < need_bits)
            throw MscError(ErrorCode::invalid_argument, "synth: d must be >= log2(n_clusters)");
        if (align_prob < 1.0 / static_cast<double>(n_clusters) || align_prob > 1.0)
            throw MscError(ErrorCode::invalid_argument, "synth: align_prob must be in [1/K, 1]");
        if (missing_fraction < 0.0 || missing_fraction > 1.0)
            throw MscError(ErrorCode::invalid_argument, "synth: missing_fraction must be in [0, 1]");
        if (n_categorical < 0 || n_continuous < 0)
            throw MscError(ErrorCode::invalid_argument, "synth: negative source count");
    }
};

struct SynthResult {
    MultiSourceDataset dataset;
    std::vector<int> labels;  // latent cluster per sample, time order
};

inline SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng = make_rng(cfg.seed);
    const int n = cfg.n_clusters * cfg.samples_per_cluster;

    // Cluster order over the timeline.
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < cfg.n_clusters; ++c)
        for (int i = 0; i < cfg.samples_per_cluster; ++i) labels.push_back(c);
    if (!cfg.temporal_blocks) {
        for (int i = n - 1; i > 0; --i) {
            const auto j = uniform_index(rng, static_cast<std::size_t>(i + 1));
            std::swap(labels[static_cast<std::size_t>(i)], labels[j]);
        }
    }

    // Blob centers on the binary-coded orthant corners.
    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(cfg.n_clusters, cfg.d);
    for (int c = 0; c < cfg.n_clusters; ++c)
        for (int b = 0; b < cfg.d; ++b)
            if ((c >> b) & 1) centers(c, b) = cfg.blob_separation;

    SynthResult out;
    out.labels = labels;
    auto& ds = out.dataset;
    ds.main.resize(n, cfg.d);
    ds.time.resize(static_cast<std::size_t>(n));
    ds.sample_ids.resize(static_cast<std::size_t>(n));
    ds.feature_names.reserve(static_cast<std::size_t>(cfg.d));
    for (int j = 0; j < cfg.d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (int i = 0; i < n; ++i) {
        ds.time[static_cast<std::size_t>(i)] = static_cast<double>(i);
        ds.sample_ids[static_cast<std::size_t>(i)] = "s" + std::to_string(i);
        for (int j = 0; j < cfg.d; ++j)
            ds.main(i, j) = centers(labels[static_cast<std::size_t>(i)], j) + cfg.blob_sigma * normal(rng);
    }

    std::vector<std::string> vocab;
    for (int c = 0; c < cfg.n_clusters; ++c) vocab.push_back("c" + std::to_string(c));

    for (int s = 0; s < cfg.n_categorical; ++s) {
        SourceDescriptor src;
        src.name = "cat" + std::to_string(s);
        src.kind = SourceKind::categorical;
        src.vocabulary = vocab;
        AuxColumn col;
        col.values.resize(static_cast<std::size_t>(n));
        col.missing.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            const int truth = labels[static_cast<std::size_t>(i)];
            int value = truth;
            if (uniform_real(rng) >= cfg.align_prob) {
                // Uniform over the other categories.
                const auto shift = 1 + uniform_index(rng, static_cast<std::size_t>(cfg.n_clusters - 1));
                value = (truth + static_cast<int>(shift)) % cfg.n_clusters;
            }
            col.values[static_cast<std::size_t>(i)] = static_cast<double>(value);
            if (uniform_real(rng) < cfg.missing_fraction) col.missing[static_cast<std::size_t>(i)] = 1;
        }
        ds.sources.push_back(std::move(src));
        ds.aux.push_back(std::move(col));
    }

    for (int s = 0; s < cfg.n_continuous; ++s) {
        SourceDescriptor src;
        src.name = "cont" + std::to_string(s);
        src.kind = SourceKind::continuous;
        AuxColumn col;
        col.values.resize(static_cast<std::size_t>(n));
        col.missing.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            col.values[static_cast<std::size_t>(i)] =
                cfg.cont_shift * static_cast<double>(labels[static_cast<std::size_t>(i)]) +
                cfg.cont_sigma * normal(rng);
            if (uniform_real(rng) < cfg.missing_fraction) col.missing[static_cast<std::size_t>(i)] = 1;
        }
        ds.sources.push_back(std::move(src));
        ds.aux.push_back(std::move(col));
    }

    ds.validate();
    return out;
}

// Writes the dataset in the manifest format plus truth.csv (latent cluster
// per sample) and tags.csv (unmasked auxiliary values, usable as `eval`
// ground truth even under injected missingness). Returns the manifest path.
inline std::string write_synth(const SynthResult& synth, const std::string& dir) {
    const std::string manifest = save_dataset(synth.dataset, dir);
    const auto& ds = synth.dataset;
    {
        std::ofstream out(std::filesystem::path(dir) / "truth.csv");
        if (!out) throw MscError(ErrorCode::io_error, "cannot write truth.csv in " + dir);
        out << "sample_id,cluster\n";
        for (std::size_t i = 0; i < synth.labels.size(); ++i)
            out << ds.sample_ids[i] << ',' << synth.labels[i] << '\n';
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "tags.csv");
        if (!out) throw MscError(ErrorCode::io_error, "cannot write tags.csv in " + dir);
        std::vector<std::string> header = {"sample_id"};
        for (const auto& src : ds.sources) header.push_back(src.name);
        write_csv_row(out, header);
        for (int i = 0; i < ds.n(); ++i) {
            std::vector<std::string> row = {ds.sample_ids[static_cast<std::size_t>(i)]};
            for (std::size_t j = 0; j < ds.sources.size(); ++j) {
                const double v = ds.aux[j].values[static_cast<std::size_t>(i)];
                row.push_back(ds.sources[j].kind == SourceKind::categorical
                                  ? ds.sources[j].vocabulary[static_cast<std::size_t>(static_cast<int>(v))]
                                  : format_double(v));
            }
            write_csv_row(out, row);
        }
    }
    return manifest;
}

}  // namespace msc

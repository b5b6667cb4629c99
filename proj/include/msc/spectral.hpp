#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "msc/dataset.hpp"
#include "msc/errors.hpp"
#include "msc/random.hpp"

namespace msc {

namespace detail {

// Eigenvalues/vectors of the symmetric S, sorted by descending eigenvalue.
inline void symmetric_eigen_desc(const Eigen::MatrixXd& s, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success)
        throw MscError(ErrorCode::eigen_failure, "eigen decomposition failed to converge");
    const int n = static_cast<int>(s.rows());
    values.resize(n);
    vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        values(i) = solver.eigenvalues()(n - 1 - i);
        vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
}

}  // namespace detail

// Largest descending eigengap lambda_k - lambda_{k+1} over k in
// [2, min(k_max, N-1)]; ties resolve toward the smaller K.
inline int estimate_num_clusters(const Eigen::MatrixXd& s, int k_max) {
    if (k_max < 2) throw MscError(ErrorCode::invalid_argument, "estimate_num_clusters: k_max must be >= 2");
    const int n = static_cast<int>(s.rows());
    if (n <= 2) return 2;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    detail::symmetric_eigen_desc(s, values, vectors);
    const int hi = std::min(k_max, n - 1);
    int best_k = 2;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= hi; ++k) {
        const double gap = values(k - 1) - values(k);
        // Gaps equal within solver noise count as ties; ties keep smaller K.
        if (gap > best_gap + 1e-12) {
            best_gap = gap;
            best_k = k;
        }
    }
    return best_k;
}

namespace detail {

// Deterministic farthest-first k-means on unit-normalised spectral
// embedding rows. Ties always resolve to the lowest index.
inline std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    std::vector<int> center_ids;
    center_ids.push_back(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n))));
    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(center_ids.size()) < k) {
        const int last = center_ids.back();
        for (int i = 0; i < n; ++i) {
            const double dist = (points.row(i) - points.row(last)).squaredNorm();
            nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], dist);
        }
        int far = 0;
        double far_dist = -1.0;
        for (int i = 0; i < n; ++i)
            if (nearest[static_cast<std::size_t>(i)] > far_dist) {
                far_dist = nearest[static_cast<std::size_t>(i)];
                far = i;
            }
        center_ids.push_back(far);
    }

    Eigen::MatrixXd centers(k, points.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = points.row(center_ids[static_cast<std::size_t>(c)]);

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = (points.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double dist = (points.row(i) - centers.row(c)).squaredNorm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<long long> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Empty cluster: steal the point farthest from its center.
                int far = 0;
                double far_dist = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double dist =
                        (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
                    if (dist > far_dist) {
                        far_dist = dist;
                        far = i;
                    }
                }
                centers.row(c) = points.row(far);
                labels[static_cast<std::size_t>(far)] = c;
            }
        }
    }
    return labels;
}

}  // namespace detail

// Embed samples as rows of the top-K eigenvectors of S (row-normalised to
// unit length) and partition with deterministic farthest-first k-means.
inline std::vector<int> spectral_cluster(const Eigen::MatrixXd& s, int k, Rng& rng) {
    const int n = static_cast<int>(s.rows());
    if (k < 2) throw MscError(ErrorCode::invalid_argument, "spectral_cluster: K must be >= 2");
    if (k > n) throw MscError(ErrorCode::invalid_argument, "spectral_cluster: K exceeds sample count");
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    detail::symmetric_eigen_desc(s, values, vectors);
    Eigen::MatrixXd embedding = vectors.leftCols(k);
    for (int i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) embedding.row(i) /= norm;
    }
    return detail::kmeans(embedding, k, rng);
}

// Per-cluster, per-source tag distribution. Categorical profiles are
// normalised category counts; continuous profiles are histograms over
// equal-width bins spanning the training range, plus the member mean.
struct TagProfile {
    std::vector<double> probs;
    bool uniform_fallback = false;  // all members missing this source
    double mean = 0.0;              // continuous only
    double bin_lo = 0.0;            // continuous only
    double bin_width = 0.0;         // continuous only
};

inline constexpr int kContinuousProfileBins = 10;

struct ClusterModel {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;  // K x d member means
    std::vector<std::vector<TagProfile>> tag_profiles;  // [cluster][source]
    std::vector<int> cluster_sizes;

    int num_clusters() const { return static_cast<int>(cluster_sizes.size()); }
};

inline int continuous_bin(const TagProfile& profile, double value) {
    if (!(profile.bin_width > 0.0)) return 0;
    const int bin = static_cast<int>(std::floor((value - profile.bin_lo) / profile.bin_width));
    return std::clamp(bin, 0, static_cast<int>(profile.probs.size()) - 1);
}

inline ClusterModel build_cluster_model(const MultiSourceDataset& ds, const std::vector<int>& labels) {
    const int n = ds.n();
    if (static_cast<int>(labels.size()) != n)
        throw MscError(ErrorCode::invalid_argument, "build_cluster_model: label count mismatch");
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw MscError(ErrorCode::invalid_argument, "build_cluster_model: negative label");
        k = std::max(k, l + 1);
    }

    ClusterModel model;
    model.labels = labels;
    model.cluster_sizes.assign(static_cast<std::size_t>(k), 0);
    model.centroids = Eigen::MatrixXd::Zero(k, ds.dims());
    for (int i = 0; i < n; ++i) {
        ++model.cluster_sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        model.centroids.row(labels[static_cast<std::size_t>(i)]) += ds.main.row(i);
    }
    for (int c = 0; c < k; ++c)
        if (model.cluster_sizes[static_cast<std::size_t>(c)] > 0)
            model.centroids.row(c) /= static_cast<double>(model.cluster_sizes[static_cast<std::size_t>(c)]);

    // Global bin ranges per continuous source.
    std::vector<double> lo(ds.sources.size(), 0.0), hi(ds.sources.size(), 0.0);
    for (std::size_t j = 0; j < ds.sources.size(); ++j) {
        if (ds.sources[j].kind != SourceKind::continuous) continue;
        bool any = false;
        for (int i = 0; i < n; ++i) {
            if (ds.aux[j].missing[static_cast<std::size_t>(i)]) continue;
            const double v = ds.aux[j].values[static_cast<std::size_t>(i)];
            if (!any) { lo[j] = hi[j] = v; any = true; }
            else { lo[j] = std::min(lo[j], v); hi[j] = std::max(hi[j], v); }
        }
    }

    model.tag_profiles.assign(static_cast<std::size_t>(k), {});
    for (int c = 0; c < k; ++c) {
        auto& per_source = model.tag_profiles[static_cast<std::size_t>(c)];
        per_source.resize(ds.sources.size());
        for (std::size_t j = 0; j < ds.sources.size(); ++j) {
            auto& profile = per_source[j];
            const bool categorical = ds.sources[j].kind == SourceKind::categorical;
            const int bins = categorical ? static_cast<int>(ds.sources[j].vocabulary.size())
                                         : kContinuousProfileBins;
            profile.probs.assign(static_cast<std::size_t>(bins), 0.0);
            if (!categorical) {
                profile.bin_lo = lo[j];
                profile.bin_width = (hi[j] - lo[j]) / static_cast<double>(bins);
            }
            long long support = 0;
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (labels[static_cast<std::size_t>(i)] != c) continue;
                if (ds.aux[j].missing[static_cast<std::size_t>(i)]) continue;
                const double v = ds.aux[j].values[static_cast<std::size_t>(i)];
                const int slot = categorical ? static_cast<int>(v) : continuous_bin(profile, v);
                profile.probs[static_cast<std::size_t>(slot)] += 1.0;
                sum += v;
                ++support;
            }
            if (support == 0) {
                profile.uniform_fallback = true;
                const double u = 1.0 / static_cast<double>(bins);
                for (double& p : profile.probs) p = u;
                if (!categorical) profile.mean = lo[j] + 0.5 * (hi[j] - lo[j]);
            } else {
                for (double& p : profile.probs) p /= static_cast<double>(support);
                if (!categorical) profile.mean = sum / static_cast<double>(support);
            }
        }
    }
    return model;
}

}  // namespace msc

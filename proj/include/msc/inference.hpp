#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "msc/errors.hpp"
#include "msc/forest.hpp"
#include "msc/spectral.hpp"

namespace msc {

// Nearest cluster among those represented in the leaf the sample reaches.
// A pseudo-only (empty) leaf falls back to the full cluster space.
template <class Vec>
int tree_nearest_cluster(const Tree& tree, const ClusterModel& model, const Vec& x) {
    const auto& members = tree.nodes[static_cast<std::size_t>(tree.leaf_of(x))].members;
    std::vector<int> clusters;
    clusters.reserve(members.size());
    for (int i : members) clusters.push_back(model.labels[static_cast<std::size_t>(i)]);
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    if (clusters.empty()) {
        clusters.resize(static_cast<std::size_t>(model.num_clusters()));
        for (int c = 0; c < model.num_clusters(); ++c) clusters[static_cast<std::size_t>(c)] = c;
    }
    int best = clusters.front();
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c : clusters) {
        const double dist = (model.centroids.row(c) - x.transpose()).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

struct Assignment {
    std::string sample_id;
    int cluster = 0;                  // majority-vote winner
    std::vector<int> per_tree;        // c*_t per tree
    std::vector<long long> votes;     // histogram over clusters, sums to T
};

namespace detail {

template <class Vec>
std::vector<int> per_tree_clusters(const MscForest& forest, const ClusterModel& model, const Vec& x) {
    std::vector<int> out;
    out.reserve(forest.trees.size());
    for (const auto& tree : forest.trees) out.push_back(tree_nearest_cluster(tree, model, x));
    return out;
}

}  // namespace detail

// Majority vote over tree-level nearest clusters; ties prefer the cluster
// with more training members, then the lower id.
template <class Vec>
Assignment assign_cluster(const MscForest& forest, const ClusterModel& model, const Vec& x) {
    Assignment a;
    a.per_tree = detail::per_tree_clusters(forest, model, x);
    a.votes.assign(static_cast<std::size_t>(model.num_clusters()), 0);
    for (int c : a.per_tree) ++a.votes[static_cast<std::size_t>(c)];
    int best = 0;
    for (int c = 1; c < model.num_clusters(); ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const auto bu = static_cast<std::size_t>(best);
        if (a.votes[cu] > a.votes[bu] ||
            (a.votes[cu] == a.votes[bu] && model.cluster_sizes[cu] > model.cluster_sizes[bu]))
            best = c;
    }
    a.cluster = best;
    return a;
}

struct TagPrediction {
    std::vector<std::vector<double>> distributions;  // per source
    std::vector<int> argmax;                         // category / bin index
};

// Average the tag profiles of the tree-level nearest clusters, then take
// the per-source argmax (ties toward the lower index).
inline TagPrediction infer_tags_from_votes(const ClusterModel& model, const std::vector<int>& per_tree) {
    TagPrediction pred;
    if (model.tag_profiles.empty()) return pred;
    const std::size_t m = model.tag_profiles.front().size();
    pred.distributions.resize(m);
    pred.argmax.assign(m, 0);
    const double scale = 1.0 / static_cast<double>(per_tree.size());
    for (std::size_t j = 0; j < m; ++j) {
        auto& dist = pred.distributions[j];
        for (int c : per_tree) {
            const auto& probs = model.tag_profiles[static_cast<std::size_t>(c)][j].probs;
            if (dist.empty()) dist.assign(probs.size(), 0.0);
            for (std::size_t v = 0; v < probs.size(); ++v) dist[v] += probs[v] * scale;
        }
        int best = 0;
        for (std::size_t v = 1; v < dist.size(); ++v)
            if (dist[v] > dist[static_cast<std::size_t>(best)]) best = static_cast<int>(v);
        pred.argmax[j] = best;
    }
    return pred;
}

template <class Vec>
TagPrediction infer_tags(const MscForest& forest, const ClusterModel& model, const Vec& x) {
    return infer_tags_from_votes(model, detail::per_tree_clusters(forest, model, x));
}

// Hard baseline: global nearest centroid (ties toward the lower id).
template <class Vec>
int assign_hard(const ClusterModel& model, const Vec& x) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.num_clusters(); ++c) {
        const double dist = (model.centroids.row(c) - x.transpose()).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

}  // namespace msc

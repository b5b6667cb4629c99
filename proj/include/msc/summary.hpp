#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "msc/affinity.hpp"
#include "msc/errors.hpp"
#include "msc/inference.hpp"

namespace msc {

// One representative per occupied cluster: the clip nearest the cluster's
// unseen-member mean, ties toward the earlier timestamp. Returns clip
// indices sorted by timestamp (clip index order).
inline std::vector<int> representatives(const std::vector<Assignment>& assignments,
                                        const Eigen::MatrixXd& features) {
    const int n = static_cast<int>(features.rows());
    if (static_cast<int>(assignments.size()) != n)
        throw MscError(ErrorCode::invalid_argument, "representatives: assignment count mismatch");
    int k = 0;
    for (const auto& a : assignments) k = std::max(k, a.cluster + 1);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, features.cols());
    std::vector<long long> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
        sums.row(assignments[static_cast<std::size_t>(i)].cluster) += features.row(i);
        ++counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)].cluster)];
    }
    std::vector<int> best(static_cast<std::size_t>(k), -1);
    std::vector<double> best_dist(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        const int c = assignments[static_cast<std::size_t>(i)].cluster;
        const Eigen::RowVectorXd mean = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        const double dist = (features.row(i) - mean).squaredNorm();
        if (dist < best_dist[static_cast<std::size_t>(c)]) {
            best_dist[static_cast<std::size_t>(c)] = dist;
            best[static_cast<std::size_t>(c)] = i;
        }
    }
    std::vector<int> reps;
    for (int c = 0; c < k; ++c)
        if (best[static_cast<std::size_t>(c)] >= 0) reps.push_back(best[static_cast<std::size_t>(c)]);
    std::sort(reps.begin(), reps.end());  // clip index order == time order
    return reps;
}

struct KeyClipResult {
    std::vector<int> clips;       // union of all path vertices, ascending
    int unreachable_pairs = 0;    // consecutive representatives with no path
};

namespace detail {

// Dijkstra with edge length 1 - affinity; zero entries are absent edges.
// Returns the path vertices from src to dst, or empty when unreachable.
inline std::vector<int> shortest_path(const AffinityMatrix& graph, int src, int dst) {
    const int n = graph.n();
    std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> prev(static_cast<std::size_t>(n), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    dist[static_cast<std::size_t>(src)] = 0.0;
    queue.push({0.0, src});
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        if (u == dst) break;
        for (int v = 0; v < n; ++v) {
            const double a = graph.values(u, v);
            if (v == u || a == 0.0) continue;
            const double nd = d + (1.0 - a);
            if (nd < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = nd;
                prev[static_cast<std::size_t>(v)] = u;
                queue.push({nd, v});
            }
        }
    }
    if (!std::isfinite(dist[static_cast<std::size_t>(dst)])) return {};
    std::vector<int> path;
    for (int v = dst; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace detail

// Shortest paths between temporally-adjacent representatives on the
// sparsified unseen affinity graph; K is the union of all path vertices.
// An unreachable pair contributes only its two endpoints.
inline KeyClipResult keyclip_paths(const AffinityMatrix& graph, std::span<const int> reps_by_time) {
    KeyClipResult result;
    std::vector<std::uint8_t> in_set(static_cast<std::size_t>(graph.n()), 0);
    for (int r : reps_by_time) in_set[static_cast<std::size_t>(r)] = 1;
    for (std::size_t i = 0; i + 1 < reps_by_time.size(); ++i) {
        const auto path = detail::shortest_path(graph, reps_by_time[i], reps_by_time[i + 1]);
        if (path.empty()) {
            ++result.unreachable_pairs;
            continue;
        }
        for (int v : path) in_set[static_cast<std::size_t>(v)] = 1;
    }
    for (int v = 0; v < graph.n(); ++v)
        if (in_set[static_cast<std::size_t>(v)]) result.clips.push_back(v);
    return result;
}

enum class Typicality { usual, interesting };

struct SummaryClip {
    std::string id;
    double t = 0.0;
    int cluster = 0;
    Typicality typicality = Typicality::usual;
    TagPrediction tags;
};

struct SummaryManifest {
    std::vector<SummaryClip> clips;  // chronological
    int num_clusters_occupied = 0;
    int num_interesting_clusters = 0;
};

// Chronological composition. Clips from the ceil(0.2 * C) smallest occupied
// clusters (by unseen-member count, ties toward the lower id) are flagged
// interesting.
inline SummaryManifest compose_summary(std::span<const int> keyclips,
                                       const std::vector<Assignment>& assignments,
                                       const std::vector<TagPrediction>& tags,
                                       const std::vector<double>& time,
                                       const std::vector<std::string>& ids) {
    if (keyclips.empty()) throw MscError(ErrorCode::empty_input, "compose_summary: empty key-clip set");
    int k = 0;
    for (const auto& a : assignments) k = std::max(k, a.cluster + 1);
    std::vector<long long> occupancy(static_cast<std::size_t>(k), 0);
    for (const auto& a : assignments) ++occupancy[static_cast<std::size_t>(a.cluster)];

    std::vector<int> occupied;
    for (int c = 0; c < k; ++c)
        if (occupancy[static_cast<std::size_t>(c)] > 0) occupied.push_back(c);
    std::sort(occupied.begin(), occupied.end(), [&](int a, int b) {
        if (occupancy[static_cast<std::size_t>(a)] != occupancy[static_cast<std::size_t>(b)])
            return occupancy[static_cast<std::size_t>(a)] < occupancy[static_cast<std::size_t>(b)];
        return a < b;
    });
    const int interesting_count =
        static_cast<int>(std::ceil(0.2 * static_cast<double>(occupied.size())));
    std::vector<std::uint8_t> interesting(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < interesting_count; ++i)
        interesting[static_cast<std::size_t>(occupied[static_cast<std::size_t>(i)])] = 1;

    SummaryManifest manifest;
    manifest.num_clusters_occupied = static_cast<int>(occupied.size());
    manifest.num_interesting_clusters = interesting_count;
    std::vector<int> ordered(keyclips.begin(), keyclips.end());
    std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
        if (time[static_cast<std::size_t>(a)] != time[static_cast<std::size_t>(b)])
            return time[static_cast<std::size_t>(a)] < time[static_cast<std::size_t>(b)];
        return a < b;
    });
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
    for (int i : ordered) {
        SummaryClip clip;
        clip.id = ids[static_cast<std::size_t>(i)];
        clip.t = time[static_cast<std::size_t>(i)];
        clip.cluster = assignments[static_cast<std::size_t>(i)].cluster;
        clip.typicality = interesting[static_cast<std::size_t>(clip.cluster)] ? Typicality::interesting
                                                                              : Typicality::usual;
        clip.tags = tags[static_cast<std::size_t>(i)];
        manifest.clips.push_back(std::move(clip));
    }
    return manifest;
}

// Coverage c~ = (N_covered / N_all) * (max_i |V_i| / |V|); the second
// factor penalises longer summaries relative to the longest compared one.
inline double coverage(std::span<const double> lengths, double v_len, long long covered, long long total) {
    if (v_len <= 0.0) throw MscError(ErrorCode::invalid_argument, "coverage: zero summary length");
    if (lengths.empty()) throw MscError(ErrorCode::empty_input, "coverage: no comparison lengths");
    double max_len = 0.0;
    for (double l : lengths) {
        if (l <= 0.0) throw MscError(ErrorCode::invalid_argument, "coverage: nonpositive length");
        max_len = std::max(max_len, l);
    }
    if (total <= 0 || covered < 0 || covered > total)
        throw MscError(ErrorCode::invalid_argument, "coverage: bad event counts");
    return (static_cast<double>(covered) / static_cast<double>(total)) * (max_len / v_len);
}

// Evenly spaced clip indices under floor spacing: index j -> floor(j*N/target).
inline std::vector<int> baseline_uniform(int n, int target) {
    if (target < 1 || target > n)
        throw MscError(ErrorCode::invalid_argument, "baseline_uniform: target must be in [1, N]");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(target));
    for (int j = 0; j < target; ++j)
        out.push_back(static_cast<int>(static_cast<long long>(j) * n / target));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

enum class ChangeNorm { l1, l2 };

// Time-order scan: emit a clip when its distance to the last emitted clip
// reaches the threshold. The first clip is always emitted.
inline std::vector<int> sufficient_change_at_threshold(const Eigen::MatrixXd& features, ChangeNorm norm,
                                                       double threshold) {
    std::vector<int> out;
    const int n = static_cast<int>(features.rows());
    if (n == 0) return out;
    out.push_back(0);
    for (int i = 1; i < n; ++i) {
        const Eigen::RowVectorXd diff = features.row(i) - features.row(out.back());
        const double dist = norm == ChangeNorm::l1 ? diff.lpNorm<1>() : diff.norm();
        if (dist >= threshold) out.push_back(i);
    }
    return out;
}

// Bisection on the threshold so the emitted clip count lands on the target
// (within +-1 when the count function steps over it).
inline std::vector<int> baseline_sufficient_change(const Eigen::MatrixXd& features, ChangeNorm norm,
                                                   int target) {
    const int n = static_cast<int>(features.rows());
    if (target < 1 || target > n)
        throw MscError(ErrorCode::invalid_argument, "baseline_sufficient_change: target must be in [1, N]");
    double hi = 0.0;
    for (int i = 1; i < n; ++i) {
        const Eigen::RowVectorXd diff = features.row(i) - features.row(0);
        const double dist = norm == ChangeNorm::l1 ? diff.lpNorm<1>() : diff.norm();
        hi = std::max(hi, dist);
    }
    hi = hi * 2.0 + 1.0;
    double lo = 0.0;  // count(lo) = n >= target >= 1 = count(hi)
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const int count = static_cast<int>(sufficient_change_at_threshold(features, norm, mid).size());
        if (count > target) lo = mid;
        else if (count < target) hi = mid;
        else return sufficient_change_at_threshold(features, norm, mid);
    }
    const auto at_lo = sufficient_change_at_threshold(features, norm, lo);
    const auto at_hi = sufficient_change_at_threshold(features, norm, hi);
    const long long err_lo = std::llabs(static_cast<long long>(at_lo.size()) - target);
    const long long err_hi = std::llabs(static_cast<long long>(at_hi.size()) - target);
    return err_hi <= err_lo ? at_hi : at_lo;
}

}  // namespace msc

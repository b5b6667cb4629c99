#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <ostream>
#include <thread>
#include <vector>

#include "msc/csv.hpp"
#include "msc/errors.hpp"
#include "msc/forest.hpp"

namespace msc {

enum class AffinityKind { dense, knn };

// Symmetric co-leaf affinity. Dense form has unit diagonal and every entry
// an integer multiple of 1/T; the knn form drops the diagonal and keeps
// only mutual-or-either top-k edges (zero entries are absent edges).
struct AffinityMatrix {
    Eigen::MatrixXd values;
    AffinityKind kind = AffinityKind::dense;
    Eigen::VectorXd degree;

    int n() const { return static_cast<int>(values.rows()); }

    void refresh_degree() { degree = values.rowwise().sum(); }
};

// Tree-level affinity: 1 iff the two samples share a leaf.
inline Eigen::MatrixXd tree_affinity(const Tree& tree, const Eigen::MatrixXd& samples) {
    const int n = static_cast<int>(samples.rows());
    std::vector<int> leaf(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) leaf[static_cast<std::size_t>(i)] = tree.leaf_of(samples.row(i));
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = leaf[static_cast<std::size_t>(i)] == leaf[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    return a;
}

namespace detail {

// Co-leaf counts accumulated leaf-wise; integer counts keep the parallel
// reduction exact regardless of thread count or merge order.
inline void accumulate_tree_counts(const Tree& tree, const Eigen::MatrixXd& samples,
                                   std::vector<std::int64_t>& counts) {
    const int n = static_cast<int>(samples.rows());
    std::vector<std::vector<int>> buckets(tree.nodes.size());
    for (int i = 0; i < n; ++i)
        buckets[static_cast<std::size_t>(tree.leaf_of(samples.row(i)))].push_back(i);
    for (const auto& bucket : buckets)
        for (std::size_t a = 0; a < bucket.size(); ++a)
            for (std::size_t b = a + 1; b < bucket.size(); ++b)
                ++counts[static_cast<std::size_t>(bucket[a]) * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(bucket[b])];
}

}  // namespace detail

// Ensemble affinity: mean of the tree-level affinities, computed without
// materialising any per-tree dense matrix.
inline AffinityMatrix forest_affinity(const MscForest& forest, const Eigen::MatrixXd& samples,
                                      int workers = 1) {
    const int n = static_cast<int>(samples.rows());
    const auto T = forest.trees.size();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);

    workers = std::max(1, std::min<int>(workers, static_cast<int>(T)));
    if (workers <= 1) {
        for (const auto& tree : forest.trees) detail::accumulate_tree_counts(tree, samples, counts);
    } else {
        std::vector<std::vector<std::int64_t>> partial(
            static_cast<std::size_t>(workers),
            std::vector<std::int64_t>(counts.size(), 0));
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = next.fetch_add(1); t < T; t = next.fetch_add(1))
                    detail::accumulate_tree_counts(forest.trees[t], samples, partial[static_cast<std::size_t>(w)]);
            });
        for (auto& th : pool) th.join();
        for (const auto& p : partial)
            for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];
    }

    AffinityMatrix out;
    out.kind = AffinityKind::dense;
    out.values.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v =
                static_cast<double>(counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                            static_cast<std::size_t>(j)]) /
                static_cast<double>(T);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    }
    out.refresh_degree();
    return out;
}

// Keeps (i, j) iff j is among i's k largest off-diagonal affinities or vice
// versa; entries tied with the k-th value are all kept. Diagonal removed.
inline AffinityMatrix knn_sparsify(const AffinityMatrix& a, int k) {
    const int n = a.n();
    if (k < 1 || k >= n) throw MscError(ErrorCode::invalid_argument, "knn_sparsify: k must be in [1, N)");
    std::vector<double> kth(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n) - 1);
    for (int i = 0; i < n; ++i) {
        int idx = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) row[static_cast<std::size_t>(idx++)] = a.values(i, j);
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end(), std::greater<double>());
        kth[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(k - 1)];
    }
    AffinityMatrix out;
    out.kind = AffinityKind::knn;
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = a.values(i, j);
            if (v >= kth[static_cast<std::size_t>(i)] || v >= kth[static_cast<std::size_t>(j)]) {
                out.values(i, j) = v;
                out.values(j, i) = v;
            }
        }
    out.refresh_degree();
    return out;
}

// S = D^{-1/2} A D^{-1/2}. Fails on isolated samples (zero row sum).
inline Eigen::MatrixXd normalise(const AffinityMatrix& a) {
    const int n = a.n();
    Eigen::VectorXd degree = a.values.rowwise().sum();
    for (int i = 0; i < n; ++i)
        if (!(degree(i) > 0.0))
            throw MscError(ErrorCode::zero_degree_row,
                           "normalise: zero-degree row at sample index " + std::to_string(i));
    Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
    return inv_sqrt.asDiagonal() * a.values * inv_sqrt.asDiagonal();
}

// Sparse coordinate-list export: one "i,j,value" line per nonzero upper
// triangle entry.
inline void export_affinity_csv(const AffinityMatrix& a, std::ostream& out) {
    out << "i,j,value\n";
    for (int i = 0; i < a.n(); ++i)
        for (int j = i; j < a.n(); ++j)
            if (a.values(i, j) != 0.0)
                out << i << ',' << j << ',' << format_double(a.values(i, j)) << '\n';
}

}  // namespace msc

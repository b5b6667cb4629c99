#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "msc/dataset.hpp"
#include "msc/forest.hpp"

namespace testutil {

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("msc_test_" + tag + "_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

// Minimal valid dataset around a given feature matrix.
inline msc::MultiSourceDataset wrap_dataset(const Eigen::MatrixXd& main) {
    msc::MultiSourceDataset ds;
    ds.main = main;
    for (int j = 0; j < main.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (int i = 0; i < main.rows(); ++i) {
        ds.time.push_back(static_cast<double>(i));
        ds.sample_ids.push_back("s" + std::to_string(i));
    }
    return ds;
}

// Exact pairwise co-leaf fraction: route every pair through every tree.
inline Eigen::MatrixXd brute_force_affinity(const msc::MscForest& forest, const Eigen::MatrixXd& samples) {
    const int n = static_cast<int>(samples.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& tree : forest.trees)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (tree.leaf_of(samples.row(i)) == tree.leaf_of(samples.row(j))) a(i, j) += 1.0;
    a /= static_cast<double>(forest.trees.size());
    for (int i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
}

// Connected components of the nonzero-affinity graph.
inline std::vector<int> connected_components(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int start = 0; start < n; ++start) {
        if (comp[static_cast<std::size_t>(start)] >= 0) continue;
        std::vector<int> stack = {start};
        comp[static_cast<std::size_t>(start)] = next;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v)
                if (v != u && a(u, v) != 0.0 && comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = next;
                    stack.push_back(v);
                }
        }
        ++next;
    }
    return comp;
}

// Label agreement up to permutation (exact match after majority mapping).
inline bool labels_match_up_to_permutation(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::vector<int>> mapping;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (static_cast<std::size_t>(a[i]) >= mapping.size()) mapping.resize(static_cast<std::size_t>(a[i]) + 1);
        mapping[static_cast<std::size_t>(a[i])].push_back(b[i]);
    }
    std::vector<int> seen;
    for (const auto& group : mapping) {
        if (group.empty()) continue;
        for (int v : group)
            if (v != group.front()) return false;  // one a-label split across b-labels
        if (std::find(seen.begin(), seen.end(), group.front()) != seen.end())
            return false;  // two a-labels merged into one b-label
        seen.push_back(group.front());
    }
    return true;
}

// Cyclic-Jacobi eigenvalues of a symmetric matrix, independent oracle for
// the library's eigensolver. Returns eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, int sweeps = 100) {
    const int n = static_cast<int>(a.rows());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
                r(p, p) = c; r(q, q) = c; r(p, q) = s; r(q, p) = -s;
                a = r.transpose() * a * r;
            }
    }
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(values.begin(), values.end(), std::greater<double>());
    return values;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

}  // namespace testutil

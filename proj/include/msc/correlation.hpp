#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "msc/errors.hpp"

namespace msc {

// Node-level correlation between two split features from the overlap of
// their optimal partitions. Integer-exact: 1 for identical partitions,
// clamped to 0 once the overlap deficit exceeds min(|L|,|R|)/|S|.
inline double node_feature_correlation_counts(long long left_nu, long long right_nu, long long overlap_left,
                                              long long overlap_right) {
    const long long n = left_nu + right_nu;
    if (left_nu <= 0 || right_nu <= 0)
        throw MscError(ErrorCode::empty_input, "node_feature_correlation: empty partition side");
    const long long p_min = std::min(left_nu, right_nu);
    const double lambda = static_cast<double>(p_min - (n - overlap_left - overlap_right)) /
                          static_cast<double>(p_min);
    return std::clamp(lambda, 0.0, 1.0);
}

inline double node_feature_correlation(std::span<const int> left_nu, std::span<const int> right_nu,
                                       std::span<const int> left_tau, std::span<const int> right_tau) {
    if (left_tau.empty() || right_tau.empty())
        throw MscError(ErrorCode::empty_input, "node_feature_correlation: empty partition side");
    auto sorted = [](std::span<const int> s) {
        std::vector<int> v(s.begin(), s.end());
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto ln = sorted(left_nu);
    const auto rn = sorted(right_nu);
    const auto lt = sorted(left_tau);
    const auto rt = sorted(right_tau);
    auto intersection_size = [](const std::vector<int>& a, const std::vector<int>& b) {
        std::size_t i = 0, j = 0;
        long long count = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] < b[j]) ++i;
            else if (b[j] < a[i]) ++j;
            else { ++count; ++i; ++j; }
        }
        return count;
    };
    return node_feature_correlation_counts(static_cast<long long>(ln.size()), static_cast<long long>(rn.size()),
                                           intersection_size(ln, lt), intersection_size(rn, rt));
}

// Per-tree raw correlation observations gathered while a tree grows.
// Keys are (winning feature, other feature) and (winning feature, aux
// source); values accumulate (sum of node-level values, observation count).
struct CorrelationLog {
    std::map<std::pair<int, int>, std::pair<double, long long>> visual_visual;
    std::map<std::pair<int, int>, std::pair<double, long long>> visual_aux;

    void record_vv(int nu, int tau, double value) {
        auto& slot = visual_visual[{nu, tau}];
        slot.first += value;
        slot.second += 1;
    }
    void record_va(int nu, int omega, double value) {
        auto& slot = visual_aux[{nu, omega}];
        slot.first += value;
        slot.second += 1;
    }
};

// Ensemble aggregation: tree-mean of per-tree node-means. Trees with no
// co-occurrence contribute 0 by default and still count in the divisor;
// set count_empty_trees = false to average over contributing trees only.
inline double aggregate_correlation(std::span<const std::pair<double, long long>> per_tree,
                                    bool count_empty_trees = true) {
    double total = 0.0;
    long long contributing = 0;
    for (const auto& [sum, count] : per_tree) {
        if (count > 0) {
            total += sum / static_cast<double>(count);
            ++contributing;
        }
    }
    const long long divisor = count_empty_trees ? static_cast<long long>(per_tree.size()) : contributing;
    return divisor > 0 ? total / static_cast<double>(divisor) : 0.0;
}

// Mean correlation over the cross product of two feature groups.
inline double source_correlation(const Eigen::MatrixXd& lambda, std::span<const int> group_i,
                                 std::span<const int> group_j) {
    if (group_i.empty() || group_j.empty())
        throw MscError(ErrorCode::empty_input, "source_correlation: empty feature group");
    double total = 0.0;
    for (int a : group_i)
        for (int b : group_j) total += lambda(a, b);
    return total / (static_cast<double>(group_i.size()) * static_cast<double>(group_j.size()));
}

struct CorrelationReport {
    Eigen::MatrixXd lambda_vv;  // d x d, row = winning feature
    Eigen::MatrixXd lambda_va;  // d x m
    Eigen::MatrixXd psi;        // (1 + m) x (1 + m), source 0 = main
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts_vv;  // co-occurrences, all trees
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts_va;
    long long trees = 0;
};

inline CorrelationReport build_correlation_report(std::span<const CorrelationLog> logs, int d, int m,
                                                  bool count_empty_trees = true) {
    CorrelationReport report;
    report.trees = static_cast<long long>(logs.size());
    report.lambda_vv = Eigen::MatrixXd::Zero(d, d);
    report.lambda_va = Eigen::MatrixXd::Zero(d, std::max(m, 1));
    report.counts_vv.setZero(d, d);
    report.counts_va.setZero(d, std::max(m, 1));
    const auto T = logs.size();

    std::map<std::pair<int, int>, std::vector<std::pair<double, long long>>> vv, va;
    for (std::size_t t = 0; t < T; ++t) {
        for (const auto& [key, value] : logs[t].visual_visual) {
            auto& rows = vv[key];
            rows.resize(T, {0.0, 0});
            rows[t] = value;
        }
        for (const auto& [key, value] : logs[t].visual_aux) {
            auto& rows = va[key];
            rows.resize(T, {0.0, 0});
            rows[t] = value;
        }
    }
    for (auto& [key, per_tree] : vv) {
        per_tree.resize(T, {0.0, 0});
        report.lambda_vv(key.first, key.second) = aggregate_correlation(per_tree, count_empty_trees);
        long long total = 0;
        for (const auto& [sum, count] : per_tree) total += count;
        report.counts_vv(key.first, key.second) = total;
    }
    for (auto& [key, per_tree] : va) {
        per_tree.resize(T, {0.0, 0});
        report.lambda_va(key.first, key.second) = aggregate_correlation(per_tree, count_empty_trees);
        long long total = 0;
        for (const auto& [sum, count] : per_tree) total += count;
        report.counts_va(key.first, key.second) = total;
    }

    report.psi = Eigen::MatrixXd::Zero(1 + m, 1 + m);
    if (d > 1) {
        double total = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                if (a != b) total += report.lambda_vv(a, b);
        report.psi(0, 0) = total / (static_cast<double>(d) * static_cast<double>(d - 1));
    }
    for (int j = 0; j < m; ++j) {
        double total = 0.0;
        for (int a = 0; a < d; ++a) total += report.lambda_va(a, j);
        report.psi(0, j + 1) = total / static_cast<double>(d);
    }
    return report;
}

// (psi + psi^T) / 2; the node-level measure is asymmetric in (nu, tau),
// so the raw matrix is reported as-is and this view is opt-in.
inline Eigen::MatrixXd symmetrised_psi(const CorrelationReport& report) {
    return 0.5 * (report.psi + report.psi.transpose());
}

}  // namespace msc

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "msc/errors.hpp"

namespace msc {

// Gini impurity G = sum_{i != j} p_i p_j = 1 - sum p_i^2; zero iff pure.
inline double gini(std::span<const long long> counts) {
    long long total = 0;
    for (long long c : counts) total += c;
    if (total <= 0) throw MscError(ErrorCode::empty_input, "gini: all-zero counts");
    double sum_sq = 0.0;
    for (long long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

inline double gini(std::initializer_list<long long> counts) {
    return gini(std::span<const long long>(counts.begin(), counts.size()));
}

// Least-squares impurity: population variance (two-pass form).
inline double regression_impurity(std::span<const double> values) {
    if (values.empty()) throw MscError(ErrorCode::empty_input, "regression_impurity: empty list");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(values.size());
}

inline double regression_impurity(std::initializer_list<double> values) {
    return regression_impurity(std::span<const double>(values.begin(), values.size()));
}

namespace detail {

inline long long count_total(std::span<const long long> counts) {
    long long t = 0;
    for (long long c : counts) t += c;
    return t;
}

// Gini gain with empty children allowed (an empty child carries weight 0).
// Used inside the joint gain where per-source support may vanish on one side.
inline double gini_gain_unchecked(std::span<const long long> parent, std::span<const long long> left,
                                  std::span<const long long> right) {
    const long long n = count_total(parent);
    const long long nl = count_total(left);
    const long long nr = count_total(right);
    double g = gini(parent);
    if (nl > 0) g -= static_cast<double>(nl) / static_cast<double>(n) * gini(left);
    if (nr > 0) g -= static_cast<double>(nr) / static_cast<double>(n) * gini(right);
    return g;
}

}  // namespace detail

// Information gain with I = Gini: I_s - (|L|/|S|) I_l - (|R|/|S|) I_r.
inline double classification_gain(std::span<const long long> parent, std::span<const long long> left,
                                  std::span<const long long> right) {
    if (parent.size() != left.size() || parent.size() != right.size())
        throw MscError(ErrorCode::invalid_argument, "classification_gain: category count mismatch");
    for (std::size_t i = 0; i < parent.size(); ++i)
        if (left[i] + right[i] != parent[i])
            throw MscError(ErrorCode::invalid_argument, "classification_gain: children do not partition parent");
    if (detail::count_total(left) == 0 || detail::count_total(right) == 0)
        throw MscError(ErrorCode::empty_input, "classification_gain: empty child");
    return detail::gini_gain_unchecked(parent, left, right);
}

inline double classification_gain(std::initializer_list<long long> parent, std::initializer_list<long long> left,
                                  std::initializer_list<long long> right) {
    return classification_gain(std::span<const long long>(parent.begin(), parent.size()),
                               std::span<const long long>(left.begin(), left.size()),
                               std::span<const long long>(right.begin(), right.size()));
}

// Running first/second moments for the regression terms; the split sweep
// moves one value at a time between the right and left accumulators.
struct MomentStats {
    long long n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        ++n;
        sum += v;
        sum_sq += v * v;
    }
    void remove(double v) {
        --n;
        sum -= v;
        sum_sq -= v * v;
    }
    double impurity() const {
        if (n <= 0) return 0.0;
        const double mean = sum / static_cast<double>(n);
        const double var = sum_sq / static_cast<double>(n) - mean * mean;
        return var > 0.0 ? var : 0.0;
    }
};

// Regression-impurity gain in the same weighted parent-minus-children
// form; empty supports carry weight 0, an empty parent support yields 0.
inline double regression_gain(const MomentStats& parent, const MomentStats& left, const MomentStats& right) {
    if (parent.n <= 0) return 0.0;
    double g = parent.impurity();
    if (left.n > 0) g -= static_cast<double>(left.n) / static_cast<double>(parent.n) * left.impurity();
    if (right.n > 0) g -= static_cast<double>(right.n) / static_cast<double>(parent.n) * right.impurity();
    return g;
}

}  // namespace msc

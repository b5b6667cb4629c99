#pragma once

#include <Eigen/Dense>

#include "msc/errors.hpp"
#include "msc/random.hpp"

namespace msc {

// Pseudo two-class augmentation: rows [0, N) are the real samples, rows
// [N, 2N) are pseudo samples drawn from the empirical marginal
// distribution of each column, independently across columns.
struct AugmentedSet {
    Eigen::MatrixXd rows;  // 2N x d
    int n_real = 0;

    int total() const { return static_cast<int>(rows.rows()); }
    bool is_pseudo(int row) const { return row >= n_real; }
    // Real rows map back to their sample index; pseudo rows map to -1.
    int origin(int row) const { return row < n_real ? row : -1; }
};

inline AugmentedSet augment(const Eigen::MatrixXd& main, Rng& rng) {
    const int n = static_cast<int>(main.rows());
    const int d = static_cast<int>(main.cols());
    if (n < 1) throw MscError(ErrorCode::empty_input, "augment: empty matrix");
    AugmentedSet out;
    out.n_real = n;
    out.rows.resize(2 * n, d);
    out.rows.topRows(n) = main;
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < d; ++j)
            out.rows(n + r, j) = main(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n))), j);
    return out;
}

}  // namespace msc

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "msc/augment.hpp"
#include "msc/correlation.hpp"
#include "msc/dataset.hpp"
#include "msc/errors.hpp"
#include "msc/impurity.hpp"
#include "msc/random.hpp"

namespace msc {

// Binary split h(x) = [projection < threshold]. Axis-aligned by default;
// the oblique variant projects onto a random two-feature direction.
struct SplitParams {
    int feature = -1;
    double threshold = 0.0;
    int feature2 = -1;  // >= 0 only for oblique splits
    double w1 = 1.0;
    double w2 = 0.0;

    template <class Vec>
    double project(const Vec& x) const {
        if (feature2 < 0) return x(feature);
        return w1 * x(feature) + w2 * x(feature2);
    }
    template <class Vec>
    bool goes_left(const Vec& x) const {
        return project(x) < threshold;
    }
};

struct TreeNode {
    SplitParams split;
    int left = -1;
    int right = -1;
    std::vector<int> members;  // leaf only: real sample indices, sorted unique

    bool is_leaf() const { return left < 0; }
};

// Root-node impurity per source; a value of 0 marks the source as dropped
// for the whole tree (constant over the bag or no support).
struct RootImpurities {
    double visual = 0.0;
    std::vector<double> aux;
    double temporal = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    SourceWeights weights;        // adapted per-tree weights, sum to 1
    RootImpurities roots;
    long long fan_in = 0;  // Phi(t) = sum over split nodes of (|S_j| - 1)

    template <class Vec>
    int leaf_of(const Vec& x) const {
        int node = 0;
        while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const auto& nd = nodes[static_cast<std::size_t>(node)];
            node = nd.split.goes_left(x) ? nd.left : nd.right;
        }
        return node;
    }
    template <class Vec>
    int leaf_depth(const Vec& x) const {
        int node = 0, depth = 0;
        while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const auto& nd = nodes[static_cast<std::size_t>(node)];
            node = nd.split.goes_left(x) ? nd.left : nd.right;
            ++depth;
        }
        return depth;
    }
};

template <class Vec>
int trace_leaf(const Tree& tree, const Vec& x) {
    return tree.leaf_of(x);
}

struct TrainConfig {
    int t_clust = 1000;
    int m_try = 0;  // 0 resolves to ceil(sqrt(d))
    int phi = 2;
    double alpha_v = 0.5;
    std::uint64_t seed = 0;
    bool oblique = false;
    bool shared_pseudo = false;  // share one pseudo sample set across trees
    int workers = 1;
    bool log_correlation = false;
    std::optional<SourceWeights> weights_override;

    int resolved_mtry(int d) const {
        if (m_try > 0) return std::min(m_try, d);
        return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    }
    void validate(int d) const {
        if (t_clust < 1) throw MscError(ErrorCode::invalid_argument, "t_clust must be >= 1");
        if (phi < 2) throw MscError(ErrorCode::invalid_argument, "phi must be >= 2");
        if (resolved_mtry(d) < 1 || resolved_mtry(d) > d)
            throw MscError(ErrorCode::invalid_argument, "m_try must be in [1, d]");
        if (!(alpha_v > 0.0) || alpha_v > 1.0)
            throw MscError(ErrorCode::invalid_argument, "alpha_v must be in (0, 1]");
        if (workers < 1) throw MscError(ErrorCode::invalid_argument, "workers must be >= 1");
        if (log_correlation && oblique)
            throw MscError(ErrorCode::invalid_argument,
                           "correlation logging requires axis-aligned splits");
    }
};

struct MscForest {
    std::vector<Tree> trees;
    TrainConfig config;
    int n_samples = 0;
    int dims = 0;
    std::vector<CorrelationLog> correlation;  // filled when config.log_correlation
};

// alpha_i -> alpha_i (1 - delta_i); the removed mass is shared evenly
// across all m + 2 weights (visual, every auxiliary, temporal).
inline SourceWeights adapt_weights(const SourceWeights& base, std::span<const double> deltas) {
    if (deltas.size() != base.aux.size())
        throw MscError(ErrorCode::invalid_argument, "adapt_weights: delta count mismatch");
    SourceWeights w = base;
    double removed = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        removed += deltas[j] * base.aux[j];
        w.aux[j] = base.aux[j] * (1.0 - deltas[j]);
    }
    const double share = removed / static_cast<double>(base.aux.size() + 2);
    w.visual += share;
    w.temporal += share;
    for (double& a : w.aux) a += share;
    return w;
}

// Zero-root-impurity sources lose their whole weight; the mass is spread
// evenly over all m + 2 slots, mirroring the adaptive weighting rule.
inline SourceWeights redistribute_dropped(const SourceWeights& base, bool drop_visual,
                                          std::span<const std::uint8_t> drop_aux, bool drop_temporal) {
    SourceWeights w = base;
    double removed = 0.0;
    if (drop_visual) { removed += w.visual; w.visual = 0.0; }
    for (std::size_t j = 0; j < w.aux.size(); ++j)
        if (drop_aux[j]) { removed += w.aux[j]; w.aux[j] = 0.0; }
    if (drop_temporal) { removed += w.temporal; w.temporal = 0.0; }
    if (removed == 0.0) return w;
    const double share = removed / static_cast<double>(w.aux.size() + 2);
    w.visual += share;
    w.temporal += share;
    for (double& a : w.aux) a += share;
    return w;
}

// Per-source statistics of a set of augmented rows. Pseudo rows count only
// toward the visual (real-vs-pseudo) term; auxiliary and temporal terms see
// real rows only, and auxiliary terms only their non-missing entries.
struct TermStats {
    std::array<long long, 2> visual{0, 0};          // [real, pseudo]
    std::vector<std::vector<long long>> cat;        // per categorical source
    std::vector<MomentStats> cont;                  // per continuous source
    MomentStats temporal;

    void init(const MultiSourceDataset& ds) {
        visual = {0, 0};
        cat.assign(ds.sources.size(), {});
        cont.assign(ds.sources.size(), MomentStats{});
        for (std::size_t j = 0; j < ds.sources.size(); ++j)
            if (ds.sources[j].kind == SourceKind::categorical)
                cat[j].assign(ds.sources[j].vocabulary.size(), 0);
        temporal = MomentStats{};
    }

    void add(const MultiSourceDataset& ds, const AugmentedSet& aug, int row) {
        const int origin = aug.origin(row);
        if (origin < 0) {
            ++visual[1];
            return;
        }
        ++visual[0];
        const auto o = static_cast<std::size_t>(origin);
        for (std::size_t j = 0; j < ds.sources.size(); ++j) {
            if (ds.aux[j].missing[o]) continue;
            if (ds.sources[j].kind == SourceKind::categorical)
                ++cat[j][static_cast<std::size_t>(static_cast<int>(ds.aux[j].values[o]))];
            else
                cont[j].add(ds.aux[j].values[o]);
        }
        temporal.add(ds.time[o]);
    }

    void remove(const MultiSourceDataset& ds, const AugmentedSet& aug, int row) {
        const int origin = aug.origin(row);
        if (origin < 0) {
            --visual[1];
            return;
        }
        --visual[0];
        const auto o = static_cast<std::size_t>(origin);
        for (std::size_t j = 0; j < ds.sources.size(); ++j) {
            if (ds.aux[j].missing[o]) continue;
            if (ds.sources[j].kind == SourceKind::categorical)
                --cat[j][static_cast<std::size_t>(static_cast<int>(ds.aux[j].values[o]))];
            else
                cont[j].remove(ds.aux[j].values[o]);
        }
        temporal.remove(ds.time[o]);
    }
};

inline TermStats term_stats(const MultiSourceDataset& ds, const AugmentedSet& aug, std::span<const int> rows) {
    TermStats stats;
    stats.init(ds);
    for (int r : rows) stats.add(ds, aug, r);
    return stats;
}

struct TermGains {
    double visual = 0.0;
    std::vector<double> aux;
    double temporal = 0.0;
};

inline TermGains term_gains(const MultiSourceDataset& ds, const TermStats& parent, const TermStats& left,
                            const TermStats& right) {
    TermGains g;
    g.aux.assign(ds.sources.size(), 0.0);
    if (parent.visual[0] + parent.visual[1] > 0)
        g.visual = detail::gini_gain_unchecked(parent.visual, left.visual, right.visual);
    for (std::size_t j = 0; j < ds.sources.size(); ++j) {
        if (ds.sources[j].kind == SourceKind::categorical) {
            long long support = 0;
            for (long long c : parent.cat[j]) support += c;
            if (support > 0)
                g.aux[j] = detail::gini_gain_unchecked(parent.cat[j], left.cat[j], right.cat[j]);
        } else {
            g.aux[j] = regression_gain(parent.cont[j], left.cont[j], right.cont[j]);
        }
    }
    g.temporal = regression_gain(parent.temporal, left.temporal, right.temporal);
    return g;
}

// Joint gain: weighted sum of per-source gains, each normalised by the
// tree-root impurity of its source. Sources with zero root impurity or
// zero weight contribute nothing.
inline double joint_gain_combine(const SourceWeights& w, const RootImpurities& roots, const TermGains& g) {
    double total = 0.0;
    if (w.visual != 0.0 && roots.visual > 0.0) total += w.visual * g.visual / roots.visual;
    for (std::size_t j = 0; j < w.aux.size(); ++j)
        if (w.aux[j] != 0.0 && roots.aux[j] > 0.0) total += w.aux[j] * g.aux[j] / roots.aux[j];
    if (w.temporal != 0.0 && roots.temporal > 0.0) total += w.temporal * g.temporal / roots.temporal;
    return total;
}

// Joint gain of one candidate split over an explicit node row set.
inline double joint_gain(const MultiSourceDataset& ds, const AugmentedSet& aug, std::span<const int> node_rows,
                         const SplitParams& split, const SourceWeights& weights, const RootImpurities& roots) {
    TermStats parent, left, right;
    parent.init(ds);
    left.init(ds);
    right.init(ds);
    for (int r : node_rows) {
        parent.add(ds, aug, r);
        if (split.goes_left(aug.rows.row(r))) left.add(ds, aug, r);
        else right.add(ds, aug, r);
    }
    return joint_gain_combine(weights, roots, term_gains(ds, parent, left, right));
}

// Visual-nonvisual correlation of a split: its normalised auxiliary gain.
// Undefined when the source has zero root impurity in this tree.
inline double node_visual_aux_correlation(const MultiSourceDataset& ds, const AugmentedSet& aug,
                                          std::span<const int> node_rows, const SplitParams& split,
                                          int source, double root_impurity) {
    if (!(root_impurity > 0.0))
        throw MscError(ErrorCode::invalid_argument,
                       "node_visual_aux_correlation: zero root impurity for source " + std::to_string(source));
    TermStats parent, left, right;
    parent.init(ds);
    left.init(ds);
    right.init(ds);
    for (int r : node_rows) {
        parent.add(ds, aug, r);
        if (split.goes_left(aug.rows.row(r))) left.add(ds, aug, r);
        else right.add(ds, aug, r);
    }
    const TermGains gains = term_gains(ds, parent, left, right);
    return gains.aux[static_cast<std::size_t>(source)] / root_impurity;
}

namespace detail {

struct CandidateFeature {
    SplitParams params;      // threshold filled during the sweep
    bool has_threshold = false;
    double best_threshold = 0.0;
};

struct Grower {
    const MultiSourceDataset& ds;
    const AugmentedSet& aug;
    const TrainConfig& cfg;
    int m_try;
    const SourceWeights& weights;
    const RootImpurities& roots;
    Rng& rng;
    Tree& tree;
    CorrelationLog* log;

    std::vector<std::pair<double, int>> sorted;  // (projection, row) scratch

    // Returns the node index in tree.nodes.
    int grow(std::vector<int>& rows) {
        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (static_cast<int>(rows.size()) < cfg.phi) {
            finish_leaf(node_index, rows);
            return node_index;
        }

        const int d = static_cast<int>(aug.rows.cols());
        std::vector<CandidateFeature> candidates;
        candidates.reserve(static_cast<std::size_t>(m_try));
        if (!cfg.oblique) {
            for (int f : sample_without_replacement(rng, d, m_try)) {
                CandidateFeature c;
                c.params.feature = f;
                candidates.push_back(c);
            }
        } else {
            for (int k = 0; k < m_try; ++k) {
                CandidateFeature c;
                if (d >= 2) {
                    auto pair = sample_without_replacement(rng, d, 2);
                    const double angle = uniform_real(rng) * 6.283185307179586476925286766559;
                    c.params.feature = pair[0];
                    c.params.feature2 = pair[1];
                    c.params.w1 = std::cos(angle);
                    c.params.w2 = std::sin(angle);
                } else {
                    c.params.feature = 0;
                }
                candidates.push_back(c);
            }
        }

        TermStats parent = term_stats(ds, aug, rows);

        double best_gain = 0.0;
        int best_candidate = -1;
        double best_threshold = 0.0;
        TermStats left, right;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            auto& cand = candidates[k];
            sorted.clear();
            sorted.reserve(rows.size());
            for (int r : rows) sorted.emplace_back(cand.params.project(aug.rows.row(r)), r);
            std::stable_sort(sorted.begin(), sorted.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            if (sorted.front().first == sorted.back().first) continue;  // constant at node

            left.init(ds);
            right = parent;
            double cand_best_gain = 0.0;
            double cand_best_thr = 0.0;
            bool cand_has = false;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                left.add(ds, aug, sorted[i].second);
                right.remove(ds, aug, sorted[i].second);
                if (!(sorted[i + 1].first > sorted[i].first)) continue;
                const double a = sorted[i].first;
                const double b = sorted[i + 1].first;
                double thr = a + (b - a) / 2.0;
                if (!(thr > a)) thr = b;  // adjacent doubles: split just below b
                const double gain = joint_gain_combine(weights, roots, term_gains(ds, parent, left, right));
                if (!cand_has || gain > cand_best_gain ||
                    (gain == cand_best_gain && thr < cand_best_thr)) {
                    cand_has = true;
                    cand_best_gain = gain;
                    cand_best_thr = thr;
                }
            }
            if (!cand_has) continue;
            cand.has_threshold = true;
            cand.best_threshold = cand_best_thr;
            const bool better =
                best_candidate < 0 || cand_best_gain > best_gain ||
                (cand_best_gain == best_gain &&
                 order_before(candidates[static_cast<std::size_t>(k)], cand_best_thr,
                              candidates[static_cast<std::size_t>(best_candidate)], best_threshold,
                              static_cast<int>(k), best_candidate));
            if (better) {
                best_gain = cand_best_gain;
                best_candidate = static_cast<int>(k);
                best_threshold = cand_best_thr;
            }
        }

        if (best_candidate < 0 || !(best_gain > 0.0)) {
            finish_leaf(node_index, rows);
            return node_index;
        }

        SplitParams split = candidates[static_cast<std::size_t>(best_candidate)].params;
        split.threshold = best_threshold;
        tree.fan_in += static_cast<long long>(rows.size()) - 1;

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (int r : rows) {
            if (split.goes_left(aug.rows.row(r))) left_rows.push_back(r);
            else right_rows.push_back(r);
        }

        if (log) record_correlation(split, candidates, best_candidate, rows, left_rows);

        tree.nodes[static_cast<std::size_t>(node_index)].split = split;
        rows.clear();
        rows.shrink_to_fit();
        const int left_index = grow(left_rows);
        const int right_index = grow(right_rows);
        tree.nodes[static_cast<std::size_t>(node_index)].left = left_index;
        tree.nodes[static_cast<std::size_t>(node_index)].right = right_index;
        return node_index;
    }

    // Equal-gain tie rule: lowest feature index, then lowest threshold
    // (candidate order for oblique splits, which carry no single index).
    static bool order_before(const CandidateFeature& a, double thr_a, const CandidateFeature& b, double thr_b,
                             int idx_a, int idx_b) {
        if (a.params.feature2 < 0 && b.params.feature2 < 0) {
            if (a.params.feature != b.params.feature) return a.params.feature < b.params.feature;
            return thr_a < thr_b;
        }
        if (idx_a != idx_b) return idx_a < idx_b;
        return thr_a < thr_b;
    }

    void finish_leaf(int node_index, std::vector<int>& rows) {
        auto& members = tree.nodes[static_cast<std::size_t>(node_index)].members;
        for (int r : rows) {
            const int origin = aug.origin(r);
            if (origin >= 0) members.push_back(origin);
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
    }

    void record_correlation(const SplitParams& winner, const std::vector<CandidateFeature>& candidates,
                            int winner_index, const std::vector<int>& rows,
                            const std::vector<int>& left_rows) {
        const long long n = static_cast<long long>(rows.size());
        const long long left_nu = static_cast<long long>(left_rows.size());
        const long long right_nu = n - left_nu;
        if (left_nu <= 0 || right_nu <= 0) return;

        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (static_cast<int>(k) == winner_index) continue;
            const auto& cand = candidates[k];
            if (!cand.has_threshold || cand.params.feature == winner.feature) continue;
            long long overlap_left = 0, overlap_right = 0;
            for (int r : rows) {
                const bool nu_left = winner.goes_left(aug.rows.row(r));
                const bool tau_left = aug.rows(r, cand.params.feature) < cand.best_threshold;
                if (nu_left && tau_left) ++overlap_left;
                if (!nu_left && !tau_left) ++overlap_right;
            }
            log->record_vv(winner.feature, cand.params.feature,
                           node_feature_correlation_counts(left_nu, right_nu, overlap_left, overlap_right));
        }

        if (!ds.sources.empty()) {
            TermStats parent = term_stats(ds, aug, rows);
            TermStats left = term_stats(ds, aug, left_rows);
            TermStats right = parent;
            for (int r : left_rows) right.remove(ds, aug, r);
            const TermGains gains = term_gains(ds, parent, left, right);
            for (std::size_t j = 0; j < ds.sources.size(); ++j) {
                if (roots.aux[j] <= 0.0) continue;  // undefined for this tree
                log->record_va(winner.feature, static_cast<int>(j), gains.aux[j] / roots.aux[j]);
            }
        }
    }
};

}  // namespace detail

// Grows one MSC-tree on a bag of augmented row indices (with multiplicity).
// Leaf member lists hold the unique real sample indices of the bag.
inline Tree train_tree(const MultiSourceDataset& ds, const AugmentedSet& aug, std::span<const int> bag_rows,
                       const TrainConfig& cfg, Rng& rng, const SourceWeights& base,
                       CorrelationLog* log = nullptr) {
    if (bag_rows.empty()) throw MscError(ErrorCode::empty_input, "train_tree: empty bag");
    Tree tree;

    std::vector<int> real_origins;
    real_origins.reserve(bag_rows.size());
    for (int r : bag_rows) {
        const int origin = aug.origin(r);
        if (origin >= 0) real_origins.push_back(origin);
    }

    std::vector<double> deltas(ds.sources.size(), 1.0);
    if (!real_origins.empty() && !ds.sources.empty()) deltas = missing_fractions(ds, real_origins);
    tree.weights = adapt_weights(base, deltas);

    const TermStats root_stats = term_stats(ds, aug, bag_rows);
    tree.roots.visual = (root_stats.visual[0] > 0 && root_stats.visual[1] > 0)
                            ? gini(root_stats.visual)
                            : 0.0;
    tree.roots.aux.assign(ds.sources.size(), 0.0);
    for (std::size_t j = 0; j < ds.sources.size(); ++j) {
        if (ds.sources[j].kind == SourceKind::categorical) {
            long long support = 0;
            for (long long c : root_stats.cat[j]) support += c;
            tree.roots.aux[j] = support > 0 ? gini(root_stats.cat[j]) : 0.0;
        } else {
            tree.roots.aux[j] = root_stats.cont[j].impurity();
        }
    }
    tree.roots.temporal = root_stats.temporal.impurity();

    std::vector<std::uint8_t> drop_aux(ds.sources.size(), 0);
    for (std::size_t j = 0; j < ds.sources.size(); ++j) drop_aux[j] = tree.roots.aux[j] <= 0.0;
    tree.weights = redistribute_dropped(tree.weights, tree.roots.visual <= 0.0, drop_aux,
                                        tree.roots.temporal <= 0.0);

    detail::Grower grower{ds,   aug,        cfg, cfg.resolved_mtry(static_cast<int>(ds.main.cols())),
                          tree.weights, tree.roots, rng, tree, log, {}};
    std::vector<int> rows(bag_rows.begin(), bag_rows.end());
    grower.grow(rows);
    return tree;
}

// Routes every training sample through the tree and adds it to the leaf it
// reaches, so member lists cover all N samples, not just the bag.
inline void extend_leaf_membership(Tree& tree, const Eigen::MatrixXd& main) {
    for (int i = 0; i < static_cast<int>(main.rows()); ++i) {
        auto& members = tree.nodes[static_cast<std::size_t>(tree.leaf_of(main.row(i)))].members;
        auto it = std::lower_bound(members.begin(), members.end(), i);
        if (it == members.end() || *it != i) members.insert(it, i);
    }
}

inline MscForest train_forest(const MultiSourceDataset& ds, TrainConfig cfg) {
    const int d = ds.dims();
    const int n = ds.n();
    cfg.validate(d);
    const SourceWeights base =
        cfg.weights_override ? *cfg.weights_override : base_weights(cfg.alpha_v, ds.sources);

    MscForest forest;
    forest.config = cfg;
    forest.n_samples = n;
    forest.dims = d;
    forest.trees.resize(static_cast<std::size_t>(cfg.t_clust));
    if (cfg.log_correlation) forest.correlation.resize(static_cast<std::size_t>(cfg.t_clust));

    std::optional<AugmentedSet> shared;
    if (cfg.shared_pseudo) {
        // Stream id far above any tree index.
        Rng rng = make_rng(derive_seed(cfg.seed, 0x8000000000000000ull));
        shared = augment(ds.main, rng);
    }

    auto train_one = [&](int t) {
        Rng rng = make_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        AugmentedSet local;
        const AugmentedSet* aug = nullptr;
        if (shared) {
            aug = &*shared;
        } else {
            local = augment(ds.main, rng);
            aug = &local;
        }
        std::vector<int> bag(static_cast<std::size_t>(aug->total()));
        for (auto& r : bag) r = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(aug->total())));
        CorrelationLog* log = cfg.log_correlation ? &forest.correlation[static_cast<std::size_t>(t)] : nullptr;
        Tree tree = train_tree(ds, *aug, bag, cfg, rng, base, log);
        extend_leaf_membership(tree, ds.main);
        forest.trees[static_cast<std::size_t>(t)] = std::move(tree);
    };

    const int workers = std::min(cfg.workers, cfg.t_clust);
    if (workers <= 1) {
        for (int t = 0; t < cfg.t_clust; ++t) train_one(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < cfg.t_clust; t = next.fetch_add(1)) train_one(t);
            });
        for (auto& th : pool) th.join();
    }
    return forest;
}

// Fan-in replay: Phi = sum over internal nodes of (arrivals - 1) when the
// given rows are routed from the root.
inline long long compute_fan_in(const Tree& tree, const Eigen::MatrixXd& rows) {
    std::vector<long long> arrivals(tree.nodes.size(), 0);
    for (int i = 0; i < static_cast<int>(rows.rows()); ++i) {
        int node = 0;
        ++arrivals[0];
        while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
            const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            node = nd.split.goes_left(rows.row(i)) ? nd.left : nd.right;
            ++arrivals[static_cast<std::size_t>(node)];
        }
    }
    long long phi = 0;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
        if (!tree.nodes[k].is_leaf() && arrivals[k] > 0) phi += arrivals[k] - 1;
    return phi;
}

struct FanInStats {
    std::vector<long long> per_tree;
    double mean = 0.0;                        // Phi*
    std::vector<long long> path_length_hist;  // index = root-to-leaf depth
};

inline FanInStats fan_in_stats(const MscForest& forest, const Eigen::MatrixXd& samples) {
    FanInStats stats;
    stats.per_tree.reserve(forest.trees.size());
    double total = 0.0;
    for (const auto& tree : forest.trees) {
        stats.per_tree.push_back(tree.fan_in);
        total += static_cast<double>(tree.fan_in);
        for (int i = 0; i < static_cast<int>(samples.rows()); ++i) {
            const int depth = tree.leaf_depth(samples.row(i));
            if (static_cast<std::size_t>(depth) >= stats.path_length_hist.size())
                stats.path_length_hist.resize(static_cast<std::size_t>(depth) + 1, 0);
            ++stats.path_length_hist[static_cast<std::size_t>(depth)];
        }
    }
    stats.mean = forest.trees.empty() ? 0.0 : total / static_cast<double>(forest.trees.size());
    return stats;
}

}  // namespace msc

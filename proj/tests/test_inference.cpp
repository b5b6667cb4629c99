#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "msc/affinity.hpp"
#include "msc/inference.hpp"
#include "msc/synth.hpp"

using namespace msc;

namespace {

// Model with explicit centroids/labels/profiles, no forest involvement.
ClusterModel manual_model(const Eigen::MatrixXd& centroids, const std::vector<int>& labels,
                          std::vector<std::vector<double>> profiles = {},
                          std::vector<int> sizes_override = {}) {
    ClusterModel model;
    model.centroids = centroids;
    model.labels = labels;
    model.cluster_sizes.assign(static_cast<std::size_t>(centroids.rows()), 0);
    for (int l : labels) ++model.cluster_sizes[static_cast<std::size_t>(l)];
    if (!sizes_override.empty()) model.cluster_sizes = std::move(sizes_override);
    if (!profiles.empty()) {
        for (int c = 0; c < static_cast<int>(centroids.rows()); ++c) {
            TagProfile profile;
            profile.probs = profiles[static_cast<std::size_t>(c)];
            model.tag_profiles.push_back({profile});
        }
    }
    return model;
}

Tree leaf_tree(const std::vector<int>& members) {
    Tree tree;
    tree.nodes.emplace_back();
    tree.nodes[0].members = members;
    return tree;
}

}  // namespace

TEST_CASE("tree-level nearest cluster is restricted to the leaf's clusters") {
    Eigen::MatrixXd centroids(4, 1);
    centroids << 0.0, 10.0, 20.0, 30.0;
    Eigen::VectorXd x(1);

    SECTION("a single-cluster leaf wins regardless of distance") {
        const auto model = manual_model(centroids, {3, 3});
        const auto tree = leaf_tree({0, 1});  // both labelled cluster 3
        x << 0.0;  // centroid 0 is far closer than centroid 3
        CHECK(tree_nearest_cluster(tree, model, x) == 3);
    }
    SECTION("zero distance to the own centroid wins") {
        const auto model = manual_model(centroids, {0, 1, 2, 3});
        const auto tree = leaf_tree({0, 1, 2, 3});
        x << 10.0;
        CHECK(tree_nearest_cluster(tree, model, x) == 1);
    }
    SECTION("leaf with clusters {1,2}: x=12 is nearer centroid 1") {
        Eigen::MatrixXd mu(3, 1);
        mu << 99.0, 10.0, 20.0;
        const auto model = manual_model(mu, {1, 2});
        const auto tree = leaf_tree({0, 1});
        x << 12.0;
        CHECK(tree_nearest_cluster(tree, model, x) == 1);
    }
    SECTION("pseudo-only leaf falls back to the full cluster space") {
        const auto model = manual_model(centroids, {0, 1, 2, 3});
        const auto tree = leaf_tree({});
        x << 29.0;
        CHECK(tree_nearest_cluster(tree, model, x) == 3);
    }
}

TEST_CASE("majority vote over trees with declared tie rules") {
    Eigen::MatrixXd centroids(2, 1);
    centroids << 0.0, 100.0;

    SECTION("unanimous forest gives full vote count") {
        const auto model = manual_model(centroids, {0, 0, 1});
        MscForest forest;
        for (int t = 0; t < 5; ++t) forest.trees.push_back(leaf_tree({0, 1}));  // cluster 0 only
        Eigen::VectorXd x(1);
        x << 50.0;
        const auto a = assign_cluster(forest, model, x);
        CHECK(a.cluster == 0);
        CHECK(a.votes[0] == 5);
        CHECK(a.votes[1] == 0);
    }
    SECTION("600 vs 400 votes selects the majority cluster") {
        const auto model = manual_model(centroids, {0, 1});
        MscForest forest;
        for (int t = 0; t < 1000; ++t)
            forest.trees.push_back(t < 600 ? leaf_tree({0}) : leaf_tree({1}));
        Eigen::VectorXd x(1);
        x << 50.0;
        const auto a = assign_cluster(forest, model, x);
        CHECK(a.cluster == 0);
        CHECK(a.votes[0] == 600);
        CHECK(a.votes[1] == 400);
        long long total = 0;
        for (auto v : a.votes) total += v;
        CHECK(total == 1000);
    }
    SECTION("exact tie between equal-size clusters goes to the lower id") {
        const auto model = manual_model(centroids, {0, 1});
        MscForest forest;
        forest.trees.push_back(leaf_tree({0}));
        forest.trees.push_back(leaf_tree({1}));
        Eigen::VectorXd x(1);
        x << 50.0;
        CHECK(assign_cluster(forest, model, x).cluster == 0);
    }
    SECTION("exact tie prefers the larger training cluster") {
        auto model = manual_model(centroids, {0, 1, 1});
        MscForest forest;
        forest.trees.push_back(leaf_tree({0}));
        forest.trees.push_back(leaf_tree({1}));
        Eigen::VectorXd x(1);
        x << 50.0;
        CHECK(assign_cluster(forest, model, x).cluster == 1);
    }
}

TEST_CASE("tag inference averages tree-level cluster profiles") {
    Eigen::MatrixXd centroids(2, 1);
    centroids << 0.0, 100.0;

    SECTION("a unanimous pure cluster predicts with probability one") {
        const auto model = manual_model(centroids, {0, 1}, {{1.0, 0.0}, {0.0, 1.0}});
        MscForest forest;
        for (int t = 0; t < 4; ++t) forest.trees.push_back(leaf_tree({1}));
        Eigen::VectorXd x(1);
        x << 100.0;
        const auto pred = infer_tags(forest, model, x);
        CHECK(pred.distributions[0][1] == 1.0);
        CHECK(pred.argmax[0] == 1);
    }
    SECTION("two opposing trees average to (0.5, 0.5), tie to category 0") {
        const auto model = manual_model(centroids, {0, 1}, {{1.0, 0.0}, {0.0, 1.0}});
        MscForest forest;
        forest.trees.push_back(leaf_tree({0}));
        forest.trees.push_back(leaf_tree({1}));
        Eigen::VectorXd x(1);
        x << 50.0;
        const auto pred = infer_tags(forest, model, x);
        CHECK(pred.distributions[0][0] == 0.5);
        CHECK(pred.distributions[0][1] == 0.5);
        CHECK(pred.argmax[0] == 0);
    }
    SECTION("profiles bounded below keep their argmax under averaging") {
        const auto model =
            manual_model(centroids, {0, 1}, {{0.65, 0.35}, {0.6, 0.4}});
        MscForest forest;
        forest.trees.push_back(leaf_tree({0}));
        forest.trees.push_back(leaf_tree({1}));
        forest.trees.push_back(leaf_tree({0, 1}));
        Eigen::VectorXd x(1);
        x << 10.0;
        const auto pred = infer_tags(forest, model, x);
        CHECK(pred.argmax[0] == 0);
        double sum = 0.0;
        for (double p : pred.distributions[0]) sum += p;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("tag distributions sum to one and respect category permutations") {
    SynthConfig synth;
    synth.n_clusters = 3;
    synth.samples_per_cluster = 15;
    synth.d = 4;
    synth.seed = 3;
    const auto data = generate(synth);
    TrainConfig cfg;
    cfg.t_clust = 25;
    cfg.seed = 12;
    const auto forest = train_forest(data.dataset, cfg);
    const auto model = build_cluster_model(data.dataset, data.labels);

    // permuted copy: swap categories 0 and 2 in the auxiliary source
    auto permuted = data.dataset;
    std::swap(permuted.sources[0].vocabulary[0], permuted.sources[0].vocabulary[2]);
    for (std::size_t i = 0; i < permuted.aux[0].values.size(); ++i) {
        const int v = static_cast<int>(permuted.aux[0].values[i]);
        permuted.aux[0].values[i] = v == 0 ? 2.0 : v == 2 ? 0.0 : static_cast<double>(v);
    }
    const auto model_permuted = build_cluster_model(permuted, data.labels);

    for (int i = 0; i < 5; ++i) {
        const auto x = data.dataset.main.row(i).transpose();
        const auto pred = infer_tags(forest, model, x);
        double sum = 0.0;
        for (double p : pred.distributions[0]) sum += p;
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));

        const auto pred_permuted = infer_tags(forest, model_permuted, x);
        CHECK(pred.distributions[0][0] == Catch::Approx(pred_permuted.distributions[0][2]).margin(1e-12));
        CHECK(pred.distributions[0][2] == Catch::Approx(pred_permuted.distributions[0][0]).margin(1e-12));
    }
}

TEST_CASE("hard assignment is the global nearest centroid") {
    Eigen::MatrixXd centroids(2, 1);
    centroids << 0.0, 10.0;
    const auto model = manual_model(centroids, {0, 1});
    Eigen::VectorXd x(1);

    SECTION("exact centroid matches its cluster") {
        x << 10.0;
        CHECK(assign_hard(model, x) == 1);
    }
    SECTION("equidistant point goes to the lower id") {
        x << 5.0;
        CHECK(assign_hard(model, x) == 0);
    }
    SECTION("a planted outlier cluster captures nearby queries") {
        // The outlier centroid sits between the query and its true cluster:
        // hard assignment returns the outlier, the failure mode soft
        // assignment avoids.
        Eigen::MatrixXd mu(2, 1);
        mu << 4.0, 10.0;  // cluster 0 is a small outlier cluster
        const auto outlier_model = manual_model(mu, {0, 1, 1, 1});
        x << 6.0;
        CHECK(assign_hard(outlier_model, x) == 0);
    }
}

TEST_CASE("replaying training samples recovers their clusters on separated blobs") {
    SynthConfig synth;
    synth.n_clusters = 4;
    synth.samples_per_cluster = 25;
    synth.d = 8;
    synth.blob_separation = 10.0;
    synth.blob_sigma = 1.0;  // 0.1 * separation
    synth.seed = 29;
    const auto data = generate(synth);
    TrainConfig cfg;
    cfg.t_clust = 60;
    cfg.seed = 6;
    const auto forest = train_forest(data.dataset, cfg);
    const auto model = build_cluster_model(data.dataset, data.labels);
    int hits = 0;
    for (int i = 0; i < data.dataset.n(); ++i) {
        const auto a = assign_cluster(forest, model, data.dataset.main.row(i).transpose());
        long long total = 0;
        for (auto v : a.votes) total += v;
        CHECK(total == cfg.t_clust);
        if (a.cluster == data.labels[static_cast<std::size_t>(i)]) ++hits;
    }
    CHECK(hits >= static_cast<int>(0.95 * data.dataset.n()));
}

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"
#include "msc/affinity.hpp"
#include "msc/synth.hpp"

using namespace msc;

namespace {

Tree single_leaf_tree(const std::vector<int>& members) {
    Tree tree;
    tree.nodes.emplace_back();
    tree.nodes[0].members = members;
    return tree;
}

Tree stump(double threshold, const std::vector<int>& left, const std::vector<int>& right) {
    Tree tree;
    TreeNode root;
    root.split.feature = 0;
    root.split.threshold = threshold;
    root.left = 1;
    root.right = 2;
    tree.nodes.push_back(root);
    tree.nodes.emplace_back();
    tree.nodes[1].members = left;
    tree.nodes.emplace_back();
    tree.nodes[2].members = right;
    return tree;
}

}  // namespace

TEST_CASE("tree affinity is co-leaf membership") {
    Eigen::MatrixXd samples(3, 1);
    samples << 0.0, 1.0, 2.0;

    SECTION("single leaf gives the all-ones matrix") {
        const auto a = tree_affinity(single_leaf_tree({0, 1, 2}), samples);
        CHECK(a == Eigen::MatrixXd::Ones(3, 3));
    }
    SECTION("different leaves give zero, self gives one") {
        const auto a = tree_affinity(stump(1.5, {0, 1}, {2}), samples);
        CHECK(a(0, 0) == 1.0);
        CHECK(a(0, 1) == 1.0);
        CHECK(a(0, 2) == 0.0);
        CHECK(a(2, 2) == 1.0);
    }
}

TEST_CASE("forest affinity matches brute-force pairwise counting exactly") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SynthConfig synth;
        synth.n_clusters = 3;
        synth.samples_per_cluster = 10;
        synth.d = 3;
        synth.seed = 100 + seed;
        const auto data = generate(synth);
        TrainConfig cfg;
        cfg.t_clust = 15;
        cfg.seed = seed;
        const auto forest = train_forest(data.dataset, cfg);
        const auto fast = forest_affinity(forest, data.dataset.main);
        const auto brute = testutil::brute_force_affinity(forest, data.dataset.main);
        CHECK(fast.values == brute);

        // every entry a multiple of 1/T, symmetric, in [0, 1]
        for (int i = 0; i < fast.n(); ++i)
            for (int j = 0; j < fast.n(); ++j) {
                CHECK(fast.values(i, j) == fast.values(j, i));
                CHECK(fast.values(i, j) >= 0.0);
                CHECK(fast.values(i, j) <= 1.0);
                const double scaled = fast.values(i, j) * 15.0;
                CHECK(scaled == Catch::Approx(std::round(scaled)).margin(1e-9));
            }
        for (int i = 0; i < fast.n(); ++i) CHECK(fast.values(i, i) == 1.0);
    }
}

TEST_CASE("a 600-of-1000-trees co-leaf pair has affinity 0.6") {
    MscForest forest;
    forest.n_samples = 2;
    forest.dims = 1;
    for (int t = 0; t < 1000; ++t) {
        if (t < 600) forest.trees.push_back(single_leaf_tree({0, 1}));
        else forest.trees.push_back(stump(0.5, {0}, {1}));
    }
    Eigen::MatrixXd samples(2, 1);
    samples << 0.0, 1.0;
    const auto a = forest_affinity(forest, samples);
    CHECK(a.values(0, 1) == 0.6);
    CHECK(a.values(0, 0) == 1.0);
}

TEST_CASE("a forest of identical trees equals the single-tree affinity") {
    Eigen::MatrixXd samples(4, 1);
    samples << 0.0, 1.0, 2.0, 3.0;
    MscForest forest;
    for (int t = 0; t < 7; ++t) forest.trees.push_back(stump(1.5, {0, 1}, {2, 3}));
    const auto ensemble = forest_affinity(forest, samples);
    CHECK(ensemble.values == tree_affinity(forest.trees[0], samples));
}

TEST_CASE("forest affinity is independent of the worker count") {
    SynthConfig synth;
    synth.n_clusters = 2;
    synth.samples_per_cluster = 15;
    synth.d = 2;
    synth.seed = 9;
    const auto data = generate(synth);
    TrainConfig cfg;
    cfg.t_clust = 12;
    cfg.seed = 4;
    const auto forest = train_forest(data.dataset, cfg);
    const auto serial = forest_affinity(forest, data.dataset.main, 1);
    const auto parallel = forest_affinity(forest, data.dataset.main, 4);
    CHECK(serial.values == parallel.values);
}

TEST_CASE("knn sparsification keeps mutual top-k edges") {
    SECTION("k = N-1 keeps every off-diagonal entry") {
        AffinityMatrix a;
        a.values.resize(3, 3);
        a.values << 1.0, 0.9, 0.1,
                    0.9, 1.0, 0.8,
                    0.1, 0.8, 1.0;
        a.refresh_degree();
        const auto sparse = knn_sparsify(a, 2);
        CHECK(sparse.values(0, 1) == 0.9);
        CHECK(sparse.values(0, 2) == 0.1);
        CHECK(sparse.values(1, 2) == 0.8);
        CHECK(sparse.values(0, 0) == 0.0);  // diagonal removed
        CHECK(sparse.kind == AffinityKind::knn);
    }
    SECTION("chain with k=1 drops the weak closing edge") {
        AffinityMatrix a;
        a.values.resize(3, 3);
        a.values << 1.0, 0.9, 0.1,
                    0.9, 1.0, 0.8,
                    0.1, 0.8, 1.0;
        a.refresh_degree();
        const auto sparse = knn_sparsify(a, 1);
        CHECK(sparse.values(0, 1) == 0.9);  // 0's best
        CHECK(sparse.values(1, 2) == 0.8);  // 2's best (union rule)
        CHECK(sparse.values(0, 2) == 0.0);  // in neither top-1
    }
    SECTION("ties at the k-th affinity are all kept") {
        AffinityMatrix a;
        a.values.resize(4, 4);
        a.values << 1.0, 0.5, 0.5, 0.5,
                    0.5, 1.0, 0.0, 0.0,
                    0.5, 0.0, 1.0, 0.0,
                    0.5, 0.0, 0.0, 1.0;
        a.refresh_degree();
        const auto sparse = knn_sparsify(a, 1);
        CHECK(sparse.values(0, 1) == 0.5);
        CHECK(sparse.values(0, 2) == 0.5);
        CHECK(sparse.values(0, 3) == 0.5);
    }
    SECTION("k out of range") {
        AffinityMatrix a;
        a.values = Eigen::MatrixXd::Identity(3, 3);
        CHECK_THROWS_AS(knn_sparsify(a, 0), MscError);
        CHECK_THROWS_AS(knn_sparsify(a, 3), MscError);
    }
}

TEST_CASE("symmetric normalisation") {
    SECTION("identity maps to identity") {
        AffinityMatrix a;
        a.values = Eigen::MatrixXd::Identity(4, 4);
        CHECK(normalise(a) == Eigen::MatrixXd::Identity(4, 4));
    }
    SECTION("all-ones 2x2 maps to all-halves") {
        AffinityMatrix a;
        a.values = Eigen::MatrixXd::Ones(2, 2);
        const auto s = normalise(a);
        CHECK(s(0, 0) == Catch::Approx(0.5).margin(1e-15));
        CHECK(s(0, 1) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("block structure is preserved") {
        AffinityMatrix a;
        a.values = Eigen::MatrixXd::Zero(4, 4);
        a.values.block(0, 0, 2, 2).setOnes();
        a.values.block(2, 2, 2, 2).setOnes();
        const auto s = normalise(a);
        CHECK(s(0, 2) == 0.0);
        CHECK(s(0, 1) == Catch::Approx(0.5).margin(1e-15));
        CHECK(s(2, 3) == Catch::Approx(0.5).margin(1e-15));
    }
    SECTION("zero-degree row reports the sample index") {
        AffinityMatrix a;
        a.values = Eigen::MatrixXd::Zero(3, 3);
        a.values(0, 1) = a.values(1, 0) = 1.0;
        try {
            normalise(a);
            FAIL("expected zero-degree error");
        } catch (const MscError& e) {
            CHECK(e.code() == ErrorCode::zero_degree_row);
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }
    SECTION("largest eigenvalue stays at most one") {
        SynthConfig synth;
        synth.n_clusters = 2;
        synth.samples_per_cluster = 10;
        synth.d = 2;
        synth.seed = 77;
        const auto data = generate(synth);
        TrainConfig cfg;
        cfg.t_clust = 20;
        cfg.seed = 1;
        const auto forest = train_forest(data.dataset, cfg);
        const auto s = normalise(forest_affinity(forest, data.dataset.main));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        CHECK(solver.eigenvalues().maxCoeff() <= 1.0 + 1e-10);
    }
}

TEST_CASE("coordinate-list export writes nonzero upper-triangle entries") {
    AffinityMatrix a;
    a.values.resize(2, 2);
    a.values << 1.0, 0.25, 0.25, 1.0;
    std::ostringstream out;
    export_affinity_csv(a, out);
    CHECK(out.str() == "i,j,value\n0,0,1\n0,1,0.25\n1,1,1\n");
}

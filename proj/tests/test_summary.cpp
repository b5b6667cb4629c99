#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "msc/summary.hpp"

using namespace msc;

namespace {

std::vector<Assignment> assignments_for(const std::vector<int>& clusters) {
    std::vector<Assignment> out(clusters.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        out[i].sample_id = "u" + std::to_string(i);
        out[i].cluster = clusters[i];
    }
    return out;
}

AffinityMatrix graph_from(const Eigen::MatrixXd& values) {
    AffinityMatrix a;
    a.values = values;
    a.kind = AffinityKind::knn;
    a.refresh_degree();
    return a;
}

}  // namespace

TEST_CASE("representatives pick the member nearest the cluster mean") {
    SECTION("a singleton cluster is its own representative") {
        Eigen::MatrixXd feats(1, 1);
        feats << 3.0;
        CHECK(representatives(assignments_for({0}), feats) == std::vector<int>{0});
    }
    SECTION("members 0, 2, 4 have mean 2: middle member wins") {
        Eigen::MatrixXd feats(3, 1);
        feats << 0.0, 2.0, 4.0;
        CHECK(representatives(assignments_for({0, 0, 0}), feats) == std::vector<int>{1});
    }
    SECTION("equidistant members resolve to the earlier timestamp") {
        Eigen::MatrixXd feats(2, 1);
        feats << 0.0, 4.0;  // mean 2, both at distance 2
        CHECK(representatives(assignments_for({0, 0}), feats) == std::vector<int>{0});
    }
    SECTION("one representative per occupied cluster, time ordered") {
        Eigen::MatrixXd feats(5, 1);
        feats << 0.0, 10.0, 0.2, 10.2, 0.25;
        // cluster 0 = {0, 2, 4}, mean 0.15 -> clip 2; cluster 1 = {1, 3},
        // midpoint tie -> earlier clip 1
        const auto reps = representatives(assignments_for({0, 1, 0, 1, 0}), feats);
        CHECK(reps == std::vector<int>{1, 2});  // sorted by clip index
    }
}

TEST_CASE("key-clip paths follow shortest affinity paths") {
    SECTION("a directly connected pair is its own path") {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
        v(0, 1) = v(1, 0) = 1.0;  // edge length 0
        const auto result = keyclip_paths(graph_from(v), std::vector<int>{0, 1});
        CHECK(result.clips == std::vector<int>{0, 1});
        CHECK(result.unreachable_pairs == 0);
    }
    SECTION("a chain with no closing edge routes through the middle") {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 3);
        v(0, 1) = v(1, 0) = 0.9;
        v(1, 2) = v(2, 1) = 0.9;
        const auto result = keyclip_paths(graph_from(v), std::vector<int>{0, 2});
        CHECK(result.clips == std::vector<int>{0, 1, 2});
    }
    SECTION("a shortcut edge beats a longer chain") {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 3);
        v(0, 1) = v(1, 0) = 0.5;
        v(1, 2) = v(2, 1) = 0.5;
        v(0, 2) = v(2, 0) = 0.95;  // direct length 0.05 < 0.5 + 0.5
        const auto result = keyclip_paths(graph_from(v), std::vector<int>{0, 2});
        CHECK(result.clips == std::vector<int>{0, 2});
    }
    SECTION("disconnected representatives contribute endpoints and a warning") {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 4);
        v(0, 1) = v(1, 0) = 0.9;  // {0,1} component, {2,3} component
        v(2, 3) = v(3, 2) = 0.9;
        const auto result = keyclip_paths(graph_from(v), std::vector<int>{0, 2});
        CHECK(result.clips == std::vector<int>{0, 2});
        CHECK(result.unreachable_pairs == 1);
    }
    SECTION("the key-clip set always contains every representative") {
        Rng rng = make_rng(15);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 6 + static_cast<int>(uniform_index(rng, 6));
            Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (uniform_real(rng) < 0.4) v(i, j) = v(j, i) = uniform_real(rng);
            std::vector<int> reps;
            for (int i = 0; i < n; ++i)
                if (uniform_real(rng) < 0.4) reps.push_back(i);
            const auto result = keyclip_paths(graph_from(v), reps);
            for (int r : reps)
                CHECK(std::find(result.clips.begin(), result.clips.end(), r) != result.clips.end());
        }
    }
}

TEST_CASE("summary composition orders by time and flags the smallest clusters") {
    std::vector<double> time = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("u" + std::to_string(i));
    std::vector<TagPrediction> tags(10);

    SECTION("five occupied clusters flag exactly one as interesting") {
        // cluster sizes: 0 -> 2, 1 -> 2, 2 -> 2, 3 -> 3, 4 -> 1 (smallest)
        const auto assignments = assignments_for({0, 0, 1, 1, 2, 2, 3, 3, 3, 4});
        std::vector<int> keyclips = {0, 2, 4, 6, 9};
        const auto manifest = compose_summary(keyclips, assignments, tags, time, ids);
        CHECK(manifest.num_clusters_occupied == 5);
        CHECK(manifest.num_interesting_clusters == 1);
        int interesting = 0;
        for (const auto& clip : manifest.clips)
            if (clip.typicality == Typicality::interesting) {
                ++interesting;
                CHECK(clip.cluster == 4);
            }
        CHECK(interesting == 1);
    }
    SECTION("a single cluster is interesting by the ceiling rule") {
        const auto assignments = assignments_for(std::vector<int>(10, 0));
        std::vector<int> keyclips = {3};
        const auto manifest = compose_summary(keyclips, assignments, tags, time, ids);
        CHECK(manifest.clips[0].typicality == Typicality::interesting);
    }
    SECTION("clip order follows timestamps regardless of cluster ids") {
        const auto assignments = assignments_for({4, 3, 2, 1, 0, 4, 3, 2, 1, 0});
        std::vector<int> keyclips = {9, 0, 5, 3};
        const auto manifest = compose_summary(keyclips, assignments, tags, time, ids);
        REQUIRE(manifest.clips.size() == 4);
        for (std::size_t i = 1; i < manifest.clips.size(); ++i)
            CHECK(manifest.clips[i - 1].t < manifest.clips[i].t);
    }
    SECTION("empty key-clip set is rejected") {
        const auto assignments = assignments_for({0});
        CHECK_THROWS_AS(compose_summary(std::vector<int>{}, assignments, tags, time, ids), MscError);
    }
}

TEST_CASE("coverage reproduces the published arithmetic") {
    const std::vector<double> lengths = {28, 29, 29, 21, 28};
    CHECK(std::round(coverage(lengths, 28, 7, 12) * 1000.0) / 10.0 == 60.4);
    CHECK(std::round(coverage(lengths, 28, 3, 12) * 1000.0) / 10.0 == 25.9);
    CHECK(coverage(lengths, 28, 0, 12) == 0.0);
    CHECK_THROWS_AS(coverage(lengths, 0.0, 3, 12), MscError);
    CHECK_THROWS_AS(coverage(lengths, 28, 13, 12), MscError);
}

TEST_CASE("coverage is invariant under common length scaling") {
    const std::vector<double> lengths = {28, 29, 29, 21, 28};
    const double base = coverage(lengths, 21, 5, 12);
    for (double scale : {2.0, 4.0, 8.0}) {
        std::vector<double> scaled = lengths;
        for (double& l : scaled) l *= scale;
        CHECK(coverage(scaled, 21 * scale, 5, 12) == base);  // exact for dyadic scales
    }
    std::vector<double> scaled = lengths;
    for (double& l : scaled) l *= 3.0;
    CHECK(coverage(scaled, 63, 5, 12) == Catch::Approx(base).epsilon(1e-14));
}

TEST_CASE("uniform baseline spaces clips by floor division") {
    CHECK(baseline_uniform(10, 10) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(baseline_uniform(10, 2) == std::vector<int>{0, 5});
    CHECK(baseline_uniform(10, 1) == std::vector<int>{0});
    CHECK(baseline_uniform(7, 3) == std::vector<int>{0, 2, 4});
    CHECK_THROWS_AS(baseline_uniform(5, 6), MscError);
}

TEST_CASE("sufficient-change baseline") {
    SECTION("constant features emit only the first clip for positive thresholds") {
        Eigen::MatrixXd feats = Eigen::MatrixXd::Constant(6, 2, 1.5);
        CHECK(sufficient_change_at_threshold(feats, ChangeNorm::l2, 0.1) == std::vector<int>{0});
    }
    SECTION("threshold zero emits every clip") {
        Eigen::MatrixXd feats = Eigen::MatrixXd::Constant(4, 1, 2.0);
        CHECK(sufficient_change_at_threshold(feats, ChangeNorm::l2, 0.0) ==
              std::vector<int>{0, 1, 2, 3});
    }
    SECTION("alternating far/near jumps select every far jump") {
        // positions 0, 10, 10.1, 20, 20.1, 30: far jumps land at 1, 3, 5
        Eigen::MatrixXd feats(6, 1);
        feats << 0.0, 10.0, 10.1, 20.0, 20.1, 30.0;
        CHECK(sufficient_change_at_threshold(feats, ChangeNorm::l1, 5.0) ==
              std::vector<int>{0, 1, 3, 5});
    }
    SECTION("bisection lands within one clip of the target") {
        Rng rng = make_rng(33);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 30;
            Eigen::MatrixXd feats(n, 2);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < 2; ++j) feats(i, j) = uniform_real(rng) * 10.0;
            const int target = 2 + static_cast<int>(uniform_index(rng, 20));
            const auto picked = baseline_sufficient_change(feats, ChangeNorm::l2, target);
            CHECK(std::abs(static_cast<long long>(picked.size()) - target) <= 1);
        }
    }
}

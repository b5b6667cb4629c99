#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "msc/augment.hpp"

using namespace msc;

TEST_CASE("constant column yields a constant pseudo column") {
    Eigen::MatrixXd main(5, 2);
    main.col(0).setConstant(3.5);
    main.col(1) << 1, 2, 3, 4, 5;
    Rng rng = make_rng(1);
    const auto aug = augment(main, rng);
    REQUIRE(aug.total() == 10);
    for (int r = 5; r < 10; ++r) CHECK(aug.rows(r, 0) == 3.5);
}

TEST_CASE("N=1 pseudo row equals the real row") {
    Eigen::MatrixXd main(1, 3);
    main << 1.0, -2.0, 0.25;
    Rng rng = make_rng(9);
    const auto aug = augment(main, rng);
    CHECK(aug.rows.row(1) == main.row(0));
    CHECK(aug.origin(0) == 0);
    CHECK(aug.origin(1) == -1);
    CHECK(aug.is_pseudo(1));
}

TEST_CASE("every pseudo coordinate occurs in the real column") {
    Rng rng = make_rng(12);
    Eigen::MatrixXd main(40, 3);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 3; ++j) main(i, j) = uniform_real(rng);
    const auto aug = augment(main, rng);
    for (int r = 40; r < 80; ++r)
        for (int j = 0; j < 3; ++j) {
            bool found = false;
            for (int i = 0; i < 40 && !found; ++i) found = main(i, j) == aug.rows(r, j);
            CHECK(found);
        }
}

TEST_CASE("binary column pseudo mean concentrates near one half") {
    const int n = 1000;
    double mean_of_means = 0.0;
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng = make_rng(100 + static_cast<std::uint64_t>(seed));
        Eigen::MatrixXd main(n, 1);
        for (int i = 0; i < n; ++i) main(i, 0) = i < n / 2 ? 0.0 : 1.0;
        const auto aug = augment(main, rng);
        mean_of_means += aug.rows.col(0).tail(n).mean();
    }
    mean_of_means /= seeds;
    CHECK(mean_of_means > 0.45);
    CHECK(mean_of_means < 0.55);
}

TEST_CASE("pseudo marginals track real marginals (KS < 0.1 at N=1000)") {
    const int n = 1000;
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        Rng rng = make_rng(seed);
        Eigen::MatrixXd main(n, 1);
        for (int i = 0; i < n; ++i) main(i, 0) = normal(rng);
        const auto aug = augment(main, rng);
        std::vector<double> real(n), pseudo(n);
        for (int i = 0; i < n; ++i) {
            real[static_cast<std::size_t>(i)] = main(i, 0);
            pseudo[static_cast<std::size_t>(i)] = aug.rows(n + i, 0);
        }
        CHECK(testutil::ks_statistic(real, pseudo) < 0.1);
    }
}

TEST_CASE("columns decorrelate in pseudo rows") {
    const int n = 1000;
    Rng rng = make_rng(21);
    Eigen::MatrixXd main(n, 2);
    for (int i = 0; i < n; ++i) {
        main(i, 0) = normal(rng);
        main(i, 1) = main(i, 0);  // perfectly correlated
    }
    const auto aug = augment(main, rng);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)] = aug.rows(n + i, 0);
        b[static_cast<std::size_t>(i)] = aug.rows(n + i, 1);
    }
    CHECK(std::abs(testutil::pearson(a, b)) < 0.2);
}

TEST_CASE("augmentation is deterministic per seed") {
    Eigen::MatrixXd main(20, 2);
    Rng init = make_rng(7);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) main(i, j) = uniform_real(init);
    Rng r1 = make_rng(55), r2 = make_rng(55);
    CHECK(augment(main, r1).rows == augment(main, r2).rows);
}

#include <doctest.h>

#include <numbers>

#include "scenalloc/errors.hpp"
#include "scenalloc/hdbscan.hpp"
#include "scenalloc/rng.hpp"

#include "test_util.hpp"

using namespace scenalloc;
using namespace scenalloc::prep;

TEST_CASE("hdbscan recovers two 10-sigma blobs") {
    Rng rng(12);
    const int per_blob = 200;
    Eigen::MatrixXd x(2 * per_blob, 2);
    std::vector<int> truth(static_cast<size_t>(2 * per_blob));
    for (int i = 0; i < 2 * per_blob; ++i) {
        int blob = i < per_blob ? 0 : 1;
        truth[static_cast<size_t>(i)] = blob;
        x(i, 0) = rng.normal() + blob * 10.0;
        x(i, 1) = rng.normal();
    }
    auto labels = hdbscan_cluster(x, 15);
    CHECK(labels.k == 2);
    CHECK(adjusted_rand_index(labels.labels, truth) >= 0.99);

    // Partition invariant: every point labeled, sizes sum to m.
    std::vector<int> sizes(static_cast<size_t>(labels.k), 0);
    for (int lbl : labels.labels) {
        REQUIRE(lbl >= 0);
        REQUIRE(lbl < labels.k);
        sizes[static_cast<size_t>(lbl)]++;
    }
    int total = 0;
    for (int s : sizes) total += s;
    CHECK(total == 2 * per_blob);
}

TEST_CASE("hdbscan collapses one tight blob to a single cluster") {
    // A structureless blob yields no selectable sub-cluster: every point is
    // noise and the documented single-cluster fallback fires.
    Rng rng(4);
    Eigen::MatrixXd x(120, 2);
    for (int i = 0; i < 120; ++i) {
        x(i, 0) = 0.1 * rng.normal();
        x(i, 1) = 0.1 * rng.normal();
    }
    auto labels = hdbscan_cluster(x, 15);
    CHECK(labels.k == 1);
    CHECK(labels.single_cluster_fallback);
    for (int lbl : labels.labels) CHECK(lbl == 0);
}

TEST_CASE("hdbscan isolates a dense center inside a sparse ring") {
    Rng rng(8);
    const int n_ring = 200, n_center = 120;
    Eigen::MatrixXd x(n_ring + n_center, 2);
    for (int i = 0; i < n_ring; ++i) {
        double angle = rng.uniform() * 2.0 * std::numbers::pi;
        double radius = 10.0 + 0.8 * rng.normal();
        x(i, 0) = radius * std::cos(angle);
        x(i, 1) = radius * std::sin(angle);
    }
    for (int i = 0; i < n_center; ++i) {
        x(n_ring + i, 0) = 0.2 * rng.normal();
        x(n_ring + i, 1) = 0.2 * rng.normal();
    }
    auto labels = hdbscan_cluster(x, 12);
    // All center points share one label.
    int center_label = labels.labels[static_cast<size_t>(n_ring)];
    for (int i = 0; i < n_center; ++i) CHECK(labels.labels[static_cast<size_t>(n_ring + i)] == center_label);
    // And that label is not the majority label of the ring.
    int ring_same = 0;
    for (int i = 0; i < n_ring; ++i)
        if (labels.labels[static_cast<size_t>(i)] == center_label) ++ring_same;
    CHECK(ring_same < n_ring / 2);
}

TEST_CASE("hdbscan validates inputs") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
    CHECK_THROWS_AS(hdbscan_cluster(x, 10), Error);
    CHECK_THROWS_AS(hdbscan_cluster(x, 1), Error);
}

#include <doctest.h>

#include "scenalloc/errors.hpp"
#include "scenalloc/rng.hpp"
#include "scenalloc/tsne.hpp"

using namespace scenalloc;
using namespace scenalloc::prep;

namespace {

// Two well-separated Gaussian blobs; labels from the generating blob.
std::pair<Eigen::MatrixXd, std::vector<int>> two_blobs(int per_blob, double separation, int dim,
                                                       uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(2 * per_blob, dim);
    std::vector<int> labels(static_cast<size_t>(2 * per_blob));
    for (int i = 0; i < 2 * per_blob; ++i) {
        int blob = i < per_blob ? 0 : 1;
        labels[static_cast<size_t>(i)] = blob;
        for (int j = 0; j < dim; ++j) x(i, j) = rng.normal() + (j == 0 ? blob * separation : 0.0);
    }
    return {x, labels};
}

}  // namespace

TEST_CASE("tsne separates 20-sigma blobs linearly") {
    auto [x, labels] = two_blobs(100, 20.0, 4, 99);
    TsneParams params;
    params.iterations = 500;
    params.seed = 1;
    auto result = tsne_embed(x, params);
    REQUIRE(result.embedding.rows() == 200);
    CHECK(result.embedding.allFinite());
    CHECK(result.final_kl <= result.initial_kl);

    // Project onto the axis between the embedded class centroids and count
    // the separation a single threshold achieves.
    Eigen::Vector2d c0 = Eigen::Vector2d::Zero(), c1 = Eigen::Vector2d::Zero();
    for (int i = 0; i < 200; ++i)
        (labels[static_cast<size_t>(i)] == 0 ? c0 : c1) += result.embedding.row(i).transpose();
    c0 /= 100.0;
    c1 /= 100.0;
    Eigen::Vector2d axis = c1 - c0;
    double midpoint = axis.dot((c0 + c1) / 2.0);
    int correct = 0;
    for (int i = 0; i < 200; ++i) {
        double side = axis.dot(result.embedding.row(i).transpose());
        bool predicted = side > midpoint;
        if (predicted == (labels[static_cast<size_t>(i)] == 1)) ++correct;
    }
    CHECK(correct >= 198);  // >= 99% separable
}

TEST_CASE("tsne keeps three distinct points distinct") {
    Eigen::MatrixXd x(3, 2);
    x << 0.0, 0.0, 5.0, 0.0, 0.0, 5.0;
    TsneParams params;
    params.perplexity = 1.0;
    params.iterations = 250;
    params.seed = 3;
    auto result = tsne_embed(x, params);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            CHECK((result.embedding.row(i) - result.embedding.row(j)).norm() > 1e-6);
}

TEST_CASE("tsne is deterministic for a fixed seed") {
    auto [x, labels] = two_blobs(30, 5.0, 3, 7);
    TsneParams params;
    params.perplexity = 10.0;
    params.iterations = 120;
    params.seed = 42;
    auto a = tsne_embed(x, params);
    auto b = tsne_embed(x, params);
    CHECK((a.embedding - b.embedding).cwiseAbs().maxCoeff() == 0.0);

    params.seed = 43;
    auto c = tsne_embed(x, params);
    CHECK((a.embedding - c.embedding).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("tsne rejects out-of-range perplexity") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 3);
    TsneParams params;
    params.perplexity = 10.0;  // 3 * 10 > 20
    CHECK_THROWS_AS(tsne_embed(x, params), Error);
    params.perplexity = 0.5;
    CHECK_THROWS_AS(tsne_embed(x, params), Error);
}

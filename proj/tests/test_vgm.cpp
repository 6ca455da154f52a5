#include <doctest.h>

#include "scenalloc/errors.hpp"
#include "scenalloc/rng.hpp"
#include "scenalloc/vgm.hpp"

using namespace scenalloc;
using namespace scenalloc::prep;

TEST_CASE("single gaussian keeps exactly one mode") {
    Rng rng(21);
    Eigen::VectorXd x(5000);
    for (int i = 0; i < x.size(); ++i) x(i) = 5.0 + rng.normal();
    auto model = vgm_fit_column(x);
    CHECK(model.n_modes() == 1);
    CHECK(model.means(0) == doctest::Approx(x.mean()).epsilon(0.02));
    CHECK(std::abs(model.means(0) - 5.0) < 0.1);
    CHECK(model.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("balanced bimodal data keeps two modes near the true means") {
    Rng rng(22);
    Eigen::VectorXd x(5000);
    for (int i = 0; i < x.size(); ++i) x(i) = (i % 2 == 0 ? -10.0 : 10.0) + rng.normal();
    auto model = vgm_fit_column(x);
    REQUIRE(model.n_modes() == 2);
    double lo = std::min(model.means(0), model.means(1));
    double hi = std::max(model.means(0), model.means(1));
    CHECK(std::abs(lo + 10.0) < 0.3);
    CHECK(std::abs(hi - 10.0) < 0.3);
    CHECK(model.weights(0) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("constant column degenerates to a floored single mode") {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(100, 7.25);
    auto model = vgm_fit_column(x);
    REQUIRE(model.n_modes() == 1);
    CHECK(model.means(0) == doctest::Approx(7.25));
    CHECK(model.stds(0) == VgmColumnModel::kStdFloor);
}

TEST_CASE("mode transform centers, saturates and inverts") {
    VgmColumnModel model;
    model.means.resize(2);
    model.means << -1.0, 2.0;
    model.stds.resize(2);
    model.stds << 0.5, 0.25;
    model.weights.resize(2);
    model.weights << 0.5, 0.5;
    model.active_mode_indices = {0, 1};

    auto at_center = mode_transform(model, 2.0);
    CHECK(at_center.mode == 1);
    CHECK(at_center.alpha == doctest::Approx(0.0));

    auto at_edge = mode_transform(model, 2.0 + 4.0 * 0.25);
    CHECK(at_edge.mode == 1);
    CHECK(at_edge.alpha == doctest::Approx(1.0));

    auto beyond = mode_transform(model, 100.0);
    CHECK(beyond.alpha == 1.0);  // clipped

    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        int mode = i % 2;
        double v = model.means(mode) + (2.0 * rng.uniform() - 1.0) * 2.0 * model.stds(mode);
        auto enc = mode_transform(model, v);
        double back = mode_inverse(model, enc.alpha, enc.mode);
        CHECK(std::abs(back - v) < 1e-8);
    }
}

TEST_CASE("fitted transform maps training data into the unit box") {
    Rng rng(41);
    Eigen::VectorXd x(2000);
    for (int i = 0; i < x.size(); ++i) x(i) = (i % 3 == 0 ? -4.0 : 3.0) + 0.7 * rng.normal();
    auto model = vgm_fit_column(x);
    for (int i = 0; i < x.size(); ++i) {
        auto enc = mode_transform(model, x(i));
        CHECK(enc.alpha >= -1.0);
        CHECK(enc.alpha <= 1.0);
        CHECK(enc.mode >= 0);
        CHECK(enc.mode < model.n_modes());
    }
}

TEST_CASE("vgm validates sample count") {
    Eigen::VectorXd x = Eigen::VectorXd::Random(10);
    CHECK_THROWS_AS(vgm_fit_column(x), Error);  // 10 < 2 * max_modes
}

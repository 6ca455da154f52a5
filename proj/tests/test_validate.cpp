#include <doctest.h>

#include <filesystem>

#include "scenalloc/errors.hpp"
#include "scenalloc/fixture.hpp"
#include "scenalloc/rng.hpp"
#include "scenalloc/validate.hpp"

using namespace scenalloc;
using namespace scenalloc::validate;

TEST_CASE("ks complement basics") {
    Eigen::VectorXd a(4), b(4);
    a << 1, 2, 3, 4;
    b << 1, 2, 3, 4;
    CHECK(ks_complement(a, b) == doctest::Approx(1.0));

    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK(ks_complement(zeros, ones) == doctest::Approx(0.0));

    b << 1, 2, 3, 10;
    CHECK(ks_complement(a, b) == doctest::Approx(0.75));  // sup gap 0.25 between 4 and 10

    CHECK_THROWS_AS(ks_complement(Eigen::VectorXd(), a), Error);
}

TEST_CASE("ks complement is symmetric and monotone-invariant") {
    Rng rng(6);
    Eigen::VectorXd a(80), b(120);
    for (int i = 0; i < 80; ++i) a(i) = rng.normal();
    for (int i = 0; i < 120; ++i) b(i) = 0.5 + 1.3 * rng.normal();
    CHECK(ks_complement(a, b) == doctest::Approx(ks_complement(b, a)));

    auto warp = [](const Eigen::VectorXd& v) {
        Eigen::VectorXd out = v;
        for (int i = 0; i < v.size(); ++i) out(i) = std::exp(0.7 * v(i)) + v(i);  // strictly monotone
        return out;
    };
    CHECK(ks_complement(warp(a), warp(b)) == doctest::Approx(ks_complement(a, b)));
}

TEST_CASE("correlation similarity") {
    Rng rng(12);
    const int m = 200, d = 4;
    Eigen::MatrixXd x(m, d);
    for (int i = 0; i < m; ++i) {
        double f = rng.normal();
        for (int j = 0; j < d; ++j) x(i, j) = f * (j + 1) + rng.normal();
    }
    // Identical datasets: all ones.
    Eigen::MatrixXd sim = correlation_similarity(x, x);
    CHECK((sim.array() - 1.0).abs().maxCoeff() < 1e-12);

    // Forced-pair example: rho_orig 0.9, rho_synth -0.1 -> similarity 0.
    // Build 2-column datasets with exact sample correlations by construction.
    Eigen::MatrixXd o(4, 2), s(4, 2);
    o.col(0) << -1, -0.5, 0.5, 1;
    o.col(1) = 0.9 * o.col(0) + std::sqrt(1 - 0.81) * (Eigen::VectorXd(4) << -0.5, 1, -1, 0.5).finished();
    // Make col(1) exactly rho = 0.9 against col(0) via Gram-Schmidt.
    Eigen::VectorXd u = o.col(0).normalized();
    Eigen::VectorXd v = (Eigen::VectorXd(4) << -0.5, 1, -1, 0.5).finished();
    v = (v - u.dot(v) * u).normalized();
    o.col(1) = 0.9 * u + std::sqrt(1 - 0.81) * v;
    s.col(0) = o.col(0);
    s.col(1) = -0.1 * u + std::sqrt(1 - 0.01) * v;
    // Columns are centered already (u, v built from centered vectors)?
    // Center explicitly to be safe.
    o.rowwise() -= o.colwise().mean();
    s.rowwise() -= s.colwise().mean();
    Eigen::MatrixXd sim2 = correlation_similarity(o, s);
    CHECK(sim2(0, 1) == doctest::Approx(0.0).epsilon(0.05));

    // Zero-variance column flagged as missing, not 1.
    Eigen::MatrixXd z = x;
    z.col(2).setConstant(5.0);
    Eigen::MatrixXd sim3 = correlation_similarity(x, z);
    CHECK(std::isnan(sim3(2, 0)));
    CHECK(sim3(2, 2) == 1.0);
    CHECK(std::isfinite(sim3(0, 1)));
}

TEST_CASE("correlation similarity is invariant to shared affine rescaling") {
    Rng rng(19);
    const int m = 150, d = 3;
    Eigen::MatrixXd o(m, d), s(m, d);
    for (int i = 0; i < m; ++i) {
        double f = rng.normal();
        for (int j = 0; j < d; ++j) {
            o(i, j) = f + rng.normal() * (j + 1);
            s(i, j) = f + rng.normal() * (j + 1.5);
        }
    }
    Eigen::MatrixXd base = correlation_similarity(o, s);
    Eigen::VectorXd scale(d), shift(d);
    scale << 3.0, 0.2, 11.0;
    shift << -4.0, 0.0, 2.5;
    Eigen::MatrixXd o2 = (o * scale.asDiagonal()).rowwise() + shift.transpose();
    Eigen::MatrixXd s2 = (s * scale.asDiagonal()).rowwise() + shift.transpose();
    CHECK((correlation_similarity(o2, s2) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("validation report on identical and shuffled data") {
    auto [table, labels] = fixture::two_regime_scenarios(300, 8);

    auto self = validation_report(table, table);
    CHECK(self.mean_ks == doctest::Approx(1.0));
    CHECK(self.min_corr_sim == doctest::Approx(1.0));
    CHECK(self.variable_names.size() == 6);

    // Shuffling each column independently preserves marginals (KS stays 1)
    // but degrades the joint structure below the unshuffled value.
    Rng rng(33);
    market::ScenarioTable shuffled = table;
    auto shuffle_row = [&](Eigen::MatrixXd& mat, Eigen::Index row) {
        for (Eigen::Index j = mat.cols() - 1; j > 0; --j) {
            auto k = static_cast<Eigen::Index>(rng.uniform_int(static_cast<uint64_t>(j) + 1));
            std::swap(mat(row, j), mat(row, k));
        }
    };
    for (Eigen::Index i = 0; i < shuffled.R.rows(); ++i) shuffle_row(shuffled.R, i);
    for (Eigen::Index i = 0; i < shuffled.F.rows(); ++i) shuffle_row(shuffled.F, i);

    auto report = validation_report(table, shuffled);
    CHECK(report.mean_ks == doctest::Approx(1.0));
    CHECK(report.min_corr_sim < self.min_corr_sim);

    auto dir = std::filesystem::temp_directory_path() / "scenalloc_test_validate";
    write_validation_artifacts(report, table, shuffled, dir.string(), {"# test"});
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "ks.csv"));
    CHECK(std::filesystem::exists(dir / "corr_similarity.csv"));
    CHECK(std::filesystem::exists(dir / "pairplot_data.csv"));
}

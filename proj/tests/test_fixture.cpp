#include <doctest.h>

#include <filesystem>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"
#include "scenalloc/fixture.hpp"
#include "scenalloc/hdbscan.hpp"
#include "scenalloc/pca.hpp"
#include "scenalloc/rng.hpp"
#include "scenalloc/tsne.hpp"

#include "test_util.hpp"

using namespace scenalloc;
using namespace scenalloc::fixture;

TEST_CASE("fixture generation is deterministic and well-formed") {
    auto spec = two_regime_spec(77);
    spec.end = Date{2005, 12, 31};
    auto a = generate_fixture(spec);
    auto b = generate_fixture(spec);
    CHECK((a.prices.prices - b.prices.prices).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.features.yields - b.features.yields).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.regime_by_day == b.regime_by_day);

    CHECK(a.prices.prices.minCoeff() > 0.0);
    CHECK(a.prices.n_assets() == 4);
    CHECK(a.features.n_features() == 2);
    // Weekdays only, strictly increasing.
    for (size_t t = 1; t < a.prices.dates.size(); ++t)
        CHECK(a.prices.dates[t - 1] < a.prices.dates[t]);

    auto other = generate_fixture(two_regime_spec(78));
    CHECK((a.prices.prices.leftCols(100) - other.prices.prices.leftCols(100)).cwiseAbs().maxCoeff() >
          0.0);
}

TEST_CASE("zero-volatility fixture compounds geometrically") {
    FixtureSpec spec;
    spec.seed = 1;
    spec.n_assets = 2;
    spec.n_tenors = 1;
    RegimeSpec r;
    r.mean_annual = (Eigen::VectorXd(2) << 0.252, 0.0).finished();
    r.vol_annual = Eigen::VectorXd::Zero(2);
    r.correlation = 0.0;
    r.yield_level = 0.02;
    spec.regimes = {r};
    spec.switch_prob = Eigen::MatrixXd::Ones(1, 1);
    spec.yield_vol = 0.0;
    spec.end = Date{2003, 12, 31};
    auto fix = generate_fixture(spec);
    const double daily = 0.252 / 252.0;
    for (Eigen::Index t = 0; t < fix.prices.n_dates(); ++t) {
        CHECK(fix.prices.prices(0, t) ==
              doctest::Approx(100.0 * std::pow(1.0 + daily, static_cast<double>(t) + 1.0)).epsilon(1e-12));
        CHECK(fix.prices.prices(1, t) == doctest::Approx(100.0));
    }
}

TEST_CASE("fixture csv export is byte-identical per seed and ingestable") {
    auto spec = dominant_asset_spec(9);
    spec.end = Date{2004, 6, 30};
    auto fix = generate_fixture(spec);

    auto dir = std::filesystem::temp_directory_path() / "scenalloc_test_fixture";
    std::filesystem::create_directories(dir);
    write_fixture_csv(fix, dir.string(), {"# seed=9"});
    auto first = read_text_file((dir / "prices.csv").string());
    write_fixture_csv(fix, dir.string(), {"# seed=9"});
    auto second = read_text_file((dir / "prices.csv").string());
    CHECK(first == second);

    market::IngestReport report;
    auto [prices, features] = market::load_market_csv((dir / "prices.csv").string(),
                                                      (dir / "yields.csv").string(), {}, &report);
    CHECK(prices.n_dates() == fix.prices.n_dates());
    CHECK((prices.prices - fix.prices.prices).cwiseAbs().maxCoeff() == 0.0);  // %.17g round trip
    CHECK(report.dropped_alignment == 0);
}

TEST_CASE("fixture spec validation") {
    auto spec = two_regime_spec(1);
    spec.switch_prob(0, 0) = 0.5;  // row no longer sums to 1
    CHECK_THROWS_AS(generate_fixture(spec), Error);

    auto bad = two_regime_spec(1);
    bad.regimes[0].correlation = 1.5;
    CHECK_THROWS_AS(generate_fixture(bad), Error);

    auto reversed = two_regime_spec(1);
    reversed.start = Date{2010, 1, 1};
    reversed.end = Date{2009, 1, 1};
    CHECK_THROWS_AS(generate_fixture(reversed), Error);
}

TEST_CASE("scenario-level two-regime fixture is balanced and separated") {
    auto [table, labels] = two_regime_scenarios(200, 4);
    CHECK(table.n_scenarios() == 400);
    int zeros = 0;
    for (int lbl : labels) zeros += lbl == 0 ? 1 : 0;
    CHECK(zeros == 200);
    // Regime separation: mean return gap dwarfs within-regime spread.
    double mean0 = 0.0, mean1 = 0.0;
    for (int j = 0; j < 400; ++j) (labels[static_cast<size_t>(j)] == 0 ? mean0 : mean1) += table.R(0, j) / 200.0;
    CHECK(mean0 > 0.05);
    CHECK(mean1 < -0.05);
}

TEST_CASE("pipeline clustering recovers strongly separated price-level regimes") {
    // Two regimes with disjoint return and yield supports, scenarios built on
    // a one-month horizon so windows straddling a switch stay rare (a long
    // horizon turns the switch into a dense interpolation band that density
    // clustering rightly treats as its own structure). The oracle scores
    // regime-pure anchors; straddling anchors have no single true regime.
    FixtureSpec spec;
    spec.seed = 1;
    spec.n_assets = 4;
    spec.n_tenors = 2;
    spec.start = Date{2003, 1, 1};
    spec.end = Date{2009, 6, 30};
    RegimeSpec bull, bear;
    bull.mean_annual = (Eigen::VectorXd(4) << 0.45, 0.40, 0.35, 0.30).finished();
    bull.vol_annual = (Eigen::VectorXd(4) << 0.03, 0.03, 0.03, 0.03).finished();
    bull.correlation = 0.2;
    bull.yield_level = 0.08;
    bear.mean_annual = (Eigen::VectorXd(4) << -0.45, -0.40, -0.35, -0.30).finished();
    bear.vol_annual = (Eigen::VectorXd(4) << 0.04, 0.04, 0.04, 0.04).finished();
    bear.correlation = 0.4;
    bear.yield_level = 0.005;
    spec.regimes = {bull, bear};
    spec.switch_prob.resize(2, 2);
    spec.switch_prob << 1 - 1.0 / 1200, 1.0 / 1200, 1.0 / 1200, 1 - 1.0 / 1200;
    spec.yield_mean_reversion = 0.08;
    spec.yield_vol = 0.0002;

    auto fix = generate_fixture(spec);
    const int horizon = 21;
    auto scen = market::build_scenario_table(fix.prices, fix.features, horizon);
    const int m = static_cast<int>(scen.n_scenarios());

    std::vector<int> truth, predicted;
    Eigen::MatrixXd data(m, 6);
    data << scen.R.transpose(), scen.F.transpose();
    auto pca = prep::pca_fit(data);
    auto scores = prep::pca_transform(pca, data);
    prep::TsneParams tp;
    tp.seed = derive_seed(1, 0x75e3);
    auto embedding = prep::tsne_embed(scores, tp);
    auto clusters = prep::hdbscan_cluster(embedding.embedding, 60);

    int straddling = 0;
    for (int t = 0; t < m; ++t) {
        int ones = 0;
        for (int dd = 0; dd < horizon; ++dd) ones += fix.regime_by_day[static_cast<size_t>(t + dd)];
        if (ones == 0 || ones == horizon) {
            truth.push_back(ones == 0 ? 0 : 1);
            predicted.push_back(clusters.labels[static_cast<size_t>(t)]);
        } else {
            ++straddling;
        }
    }
    REQUIRE(truth.size() > 1000);
    CHECK(clusters.k == 2);
    CHECK(adjusted_rand_index(predicted, truth) >= 0.9);
}

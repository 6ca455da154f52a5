#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenalloc/market_data.hpp"
#include "scenalloc/rng.hpp"

namespace scenalloc::fixture {

// Deterministic market-data generator standing in for proprietary index
// data: a regime-switching multivariate return process plus a three-factor
// (level/slope/curvature) yield curve whose level anchors per regime.
struct RegimeSpec {
    Eigen::VectorXd mean_annual;  // per asset
    Eigen::VectorXd vol_annual;   // per asset
    double correlation = 0.0;     // equicorrelation across assets
    double yield_level = 0.02;    // level-factor anchor while in this regime
};

struct FixtureSpec {
    int n_assets = 4;
    int n_tenors = 2;
    std::vector<RegimeSpec> regimes;
    Eigen::MatrixXd switch_prob;  // row-stochastic, one row per regime (daily)
    Date start{2003, 1, 1};
    Date end{2012, 6, 30};
    double yield_mean_reversion = 0.02;  // daily AR(1) pull toward the anchor
    double yield_vol = 0.0004;           // daily factor noise
    uint64_t seed = 0;

    void validate() const;
};

struct FixtureResult {
    market::PriceTable prices;
    market::FeatureTable features;
    std::vector<int> regime_by_day;
};

FixtureResult generate_fixture(const FixtureSpec& spec);

// prices.csv, yields.csv plus regimes.csv (the oracle labels).
void write_fixture_csv(const FixtureResult& result, const std::string& out_dir,
                       const std::vector<std::string>& comments);

// Built-in presets.
FixtureSpec two_regime_spec(uint64_t seed);
FixtureSpec dominant_asset_spec(uint64_t seed);
FixtureSpec spec_by_name(const std::string& name, uint64_t seed);

// Scenario-level two-regime fixture: each column drawn i.i.d. from one of two
// well-separated joint normals. Returns the table and the true labels.
std::pair<market::ScenarioTable, std::vector<int>> two_regime_scenarios(int per_regime,
                                                                        uint64_t seed);

}  // namespace scenalloc::fixture

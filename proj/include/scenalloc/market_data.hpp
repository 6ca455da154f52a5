#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scenalloc/dates.hpp"

namespace scenalloc::market {

// Index levels, one row per asset, one column per trading date.
// Invariants: dates strictly increasing, all prices > 0, no gaps.
struct PriceTable {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd prices;  // n x T

    Eigen::Index n_assets() const { return prices.rows(); }
    Eigen::Index n_dates() const { return prices.cols(); }
};

// Yield-curve snapshots in decimal per annum, one row per tenor.
struct FeatureTable {
    std::vector<Date> dates;
    std::vector<std::string> tenors;
    Eigen::MatrixXd yields;  // l x T

    Eigen::Index n_features() const { return yields.rows(); }
    Eigen::Index n_dates() const { return yields.cols(); }
};

// Column-aligned horizon returns and feature snapshots. Column j holds the
// return over [dates[j], dates[j] + horizon rows) and the features observed
// exactly on dates[j].
struct ScenarioTable {
    Eigen::MatrixXd R;  // n x m, decimal returns
    Eigen::MatrixXd F;  // l x m
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    std::vector<std::string> tenors;
    int horizon_days = 0;

    Eigen::Index n_assets() const { return R.rows(); }
    Eigen::Index n_features() const { return F.rows(); }
    Eigen::Index n_scenarios() const { return R.cols(); }
};

struct IngestConfig {
    int horizon_days = 252;
    std::string date_format = "%Y-%m-%d";
};

struct IngestReport {
    int dropped_price_rows = 0;    // rows with a blank cell
    int dropped_yield_rows = 0;
    int dropped_alignment = 0;     // dates present in only one file
};

// Loads prices.csv (`date,<ticker>...`) and yields.csv (`date,<tenor>...`),
// drops rows containing blanks, and aligns both tables on the intersection of
// their dates. Non-positive prices and malformed cells are hard errors.
std::pair<PriceTable, FeatureTable> load_market_csv(const std::string& prices_path,
                                                    const std::string& yields_path,
                                                    const IngestConfig& config,
                                                    IngestReport* report = nullptr);

// R[:,t] = prices(t + h) / prices(t) - 1, F[:,t] = yields(t), using row
// offsets for the horizon. m = T - h.
ScenarioTable build_scenario_table(const PriceTable& prices, const FeatureTable& features,
                                   int horizon_days);

// Restricts columns to anchor dates within [start, end], order preserved.
ScenarioTable slice_window(const ScenarioTable& table, const Date& start, const Date& end);

// Scenario CSV format shared by the CLI: returns columns are prefixed
// `ret:`, features `feat:`; optional leading `date` and trailing `cluster`
// columns. Synthetic tables have no dates.
void write_scenario_csv(const std::string& path, const ScenarioTable& table,
                        const std::vector<int>* cluster_ids,
                        const std::vector<std::string>& comments);
struct ScenarioCsv {
    ScenarioTable table;
    std::vector<int> cluster_ids;  // empty if the file has no cluster column
};
ScenarioCsv read_scenario_csv(const std::string& path);

}  // namespace scenalloc::market

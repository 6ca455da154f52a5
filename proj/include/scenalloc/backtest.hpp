#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenalloc/ctgan.hpp"
#include "scenalloc/cvar.hpp"
#include "scenalloc/market_data.hpp"

namespace scenalloc::backtest {

enum class StrategyKind { GwoF, GwF, HwoF, HwF, EW };

const char* strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

struct StrategySpec {
    StrategyKind kind = StrategyKind::EW;
    int scenario_count = 500;

    bool uses_features() const { return kind == StrategyKind::GwF || kind == StrategyKind::HwF; }
    bool uses_sdg() const { return kind == StrategyKind::GwoF || kind == StrategyKind::GwF; }
};

std::vector<StrategySpec> all_strategies(int scenario_count = 500);

struct BacktestConfig {
    int lookback_years = 5;
    int rebalance_month = 1;  // January
    std::vector<double> cvar_grid = {0.075, 0.10, 0.125, 0.15, 0.175, 0.20, 0.225, 0.25, 0.275, 0.30};
    int runs_per_level = 5;
    double alpha = 0.95;
    std::vector<double> spreads_bp;  // per asset, bid-ask in basis points
    int horizon_days = 252;
    int min_window_scenarios = 200;
    sdg::CtganConfig ctgan;  // seed is re-derived per (window, run)
    uint64_t seed = 0;
    int jobs = 1;
};

// One (strategy, lambda, run) cell across all rebalances.
struct CellResult {
    Eigen::MatrixXd weights;             // rebalances x assets
    std::vector<double> segment_returns;  // realized, from index levels
    std::vector<double> year_fractions;
    double annualized_return = 0.0;
    double cvar_ex_post = 0.0;
    double mean_hh = 0.0;
    double rotation = 0.0;
    double expense_bp = 0.0;  // annualized transaction expense
    double net_return = 0.0;  // annualized_return - expense
    int infeasible_solves = 0;
    // Per-rebalance solver diagnostics on the training scenarios (NaN for EW
    // and infeasible solves).
    std::vector<double> train_cvar;
    std::vector<double> train_objective;
};

struct CellStats {
    double mean = 0.0;
    double stddev = 0.0;  // population convention across runs
};

struct BacktestResult {
    std::vector<Date> rebalance_dates;
    std::vector<double> segment_year_fractions;
    std::vector<StrategySpec> strategies;
    std::vector<double> cvar_grid;
    std::vector<std::string> tickers;
    int runs = 0;
    // cells[strategy][lambda][run]
    std::vector<std::vector<std::vector<CellResult>>> cells;

    const CellResult& cell(size_t s, size_t l, size_t r) const { return cells[s][l][r]; }
    CellStats aggregate(size_t s, size_t l, double CellResult::* metric) const;
};

// ---- metrics -------------------------------------------------------------

// Geometric annualization over (return, year_fraction) segments.
double annualized_return(const std::vector<std::pair<double, double>>& segments);

// Average annual sum of absolute weight changes, weights in percent.
double rotation(const Eigen::MatrixXd& weight_history);

// Complementary Herfindahl-Hirschman index, normalized so 1/n weights give 1.
// n = 1 is undefined: returns 0 and clears *defined when provided.
double hh_index(const Eigen::VectorXd& x, bool* defined = nullptr);

// Half-spread cost per unit traded at each rebalance, annualized over the
// backtest span. Basis points in, basis points out.
double transaction_expense_bp(const Eigen::MatrixXd& weight_history,
                              const Eigen::VectorXd& spreads_bp, double total_years);

// Empirical CVaR of the realized segment returns under uniform weights.
double cvar_ex_post(const std::vector<double>& segment_returns, double alpha);

// ---- engine ----------------------------------------------------------------

BacktestResult run_backtest(const market::PriceTable& prices, const market::FeatureTable& features,
                            const BacktestConfig& config, const std::vector<StrategySpec>& strategies);

// Tidy CSV (strategy, lambda, run, metric, value), per-rebalance weights CSV,
// and a summary JSON with cross-run means/stds per table cell.
void write_backtest_outputs(const BacktestResult& result, const std::string& out_dir,
                            const std::vector<std::string>& comments);

}  // namespace scenalloc::backtest

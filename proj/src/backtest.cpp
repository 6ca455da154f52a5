#include "scenalloc/backtest.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"
#include "scenalloc/zscore.hpp"

namespace scenalloc::backtest {

const char* strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::GwoF: return "Gw/oF";
        case StrategyKind::GwF: return "GwF";
        case StrategyKind::HwoF: return "Hw/oF";
        case StrategyKind::HwF: return "HwF";
        case StrategyKind::EW: return "EW";
    }
    return "?";
}

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "Gw/oF" || name == "GwoF") return StrategyKind::GwoF;
    if (name == "GwF") return StrategyKind::GwF;
    if (name == "Hw/oF" || name == "HwoF") return StrategyKind::HwoF;
    if (name == "HwF") return StrategyKind::HwF;
    if (name == "EW") return StrategyKind::EW;
    throw Error(ErrorKind::Parameter, strfmt("unknown strategy '%s'", name.c_str()));
}

std::vector<StrategySpec> all_strategies(int scenario_count) {
    std::vector<StrategySpec> out;
    for (auto kind : {StrategyKind::GwoF, StrategyKind::GwF, StrategyKind::HwoF, StrategyKind::HwF,
                      StrategyKind::EW})
        out.push_back({kind, scenario_count});
    return out;
}

// ---- metrics ---------------------------------------------------------------

double annualized_return(const std::vector<std::pair<double, double>>& segments) {
    if (segments.empty()) throw Error(ErrorKind::Parameter, "no segments");
    double factor = 1.0, years = 0.0;
    for (auto& [ret, frac] : segments) {
        if (!(frac > 0.0)) throw Error(ErrorKind::Parameter, "year fractions must be positive");
        if (1.0 + ret <= 0.0)
            throw Error(ErrorKind::Numeric, strfmt("total loss in a segment (return %.4f)", ret));
        factor *= 1.0 + ret;
        years += frac;
    }
    return std::pow(factor, 1.0 / years) - 1.0;
}

double rotation(const Eigen::MatrixXd& weight_history) {
    const Eigen::Index T = weight_history.rows();
    if (T < 2) throw Error(ErrorKind::Parameter, "rotation needs at least 2 rebalances");
    double total = 0.0;
    for (Eigen::Index t = 1; t < T; ++t)
        total += (weight_history.row(t) - weight_history.row(t - 1)).cwiseAbs().sum() * 100.0;
    return total / static_cast<double>(T - 1);
}

double hh_index(const Eigen::VectorXd& x, bool* defined) {
    if (defined) *defined = true;
    const Eigen::Index n = x.size();
    if (n < 1) throw Error(ErrorKind::Parameter, "empty weight vector");
    if (n == 1) {
        if (defined) *defined = false;
        return 0.0;
    }
    double sum_sq = x.squaredNorm();
    return (1.0 - sum_sq) / (1.0 - 1.0 / static_cast<double>(n));
}

double transaction_expense_bp(const Eigen::MatrixXd& weight_history,
                              const Eigen::VectorXd& spreads_bp, double total_years) {
    if (spreads_bp.size() != weight_history.cols())
        throw Error(ErrorKind::Parameter,
                    strfmt("have %lld spreads for %lld assets", static_cast<long long>(spreads_bp.size()),
                           static_cast<long long>(weight_history.cols())));
    if (!(total_years > 0.0)) throw Error(ErrorKind::Parameter, "total_years must be positive");
    double total = 0.0;
    for (Eigen::Index t = 1; t < weight_history.rows(); ++t)
        total += 0.5 * (weight_history.row(t) - weight_history.row(t - 1))
                           .cwiseAbs()
                           .cwiseProduct(spreads_bp.transpose())
                           .sum();
    return total / total_years;
}

double cvar_ex_post(const std::vector<double>& segment_returns, double alpha) {
    if (segment_returns.empty()) throw Error(ErrorKind::Parameter, "no segment returns");
    const auto m = static_cast<Eigen::Index>(segment_returns.size());
    Eigen::VectorXd losses(m);
    for (Eigen::Index j = 0; j < m; ++j) losses(j) = -segment_returns[static_cast<size_t>(j)];
    return cvar::empirical_cvar_of_losses(std::move(losses),
                                          Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)),
                                          alpha);
}

// ---- engine ----------------------------------------------------------------

namespace {

struct Window {
    Eigen::Index window_begin;  // row range [window_begin, rebalance_row)
    Eigen::Index rebalance_row;
    Eigen::Index hold_end_row;  // evaluation row (next rebalance or last row)
};

struct TaskOutput {
    // weights[strategy][lambda]
    std::vector<std::vector<Eigen::VectorXd>> weights;
    std::vector<std::vector<int>> infeasible;
    std::vector<std::vector<double>> train_cvar;       // ex-ante, NaN when n/a
    std::vector<std::vector<double>> train_objective;  // NaN when n/a
};

market::ScenarioTable build_window_table(const market::PriceTable& prices,
                                         const market::FeatureTable& features, const Window& win,
                                         int horizon_days) {
    market::PriceTable psub;
    psub.tickers = prices.tickers;
    market::FeatureTable fsub;
    fsub.tenors = features.tenors;
    const Eigen::Index count = win.rebalance_row - win.window_begin;
    psub.prices = prices.prices.middleCols(win.window_begin, count);
    fsub.yields = features.yields.middleCols(win.window_begin, count);
    psub.dates.assign(prices.dates.begin() + win.window_begin, prices.dates.begin() + win.rebalance_row);
    fsub.dates = psub.dates;
    return market::build_scenario_table(psub, fsub, horizon_days);
}

}  // namespace

BacktestResult run_backtest(const market::PriceTable& prices, const market::FeatureTable& features,
                            const BacktestConfig& config, const std::vector<StrategySpec>& strategies) {
    const Eigen::Index n = prices.n_assets();
    const Eigen::Index T = prices.n_dates();
    if (T != features.n_dates()) throw Error(ErrorKind::Shape, "price/feature tables not aligned");
    if (strategies.empty()) throw Error(ErrorKind::Parameter, "no strategies requested");
    if (config.runs_per_level < 1) throw Error(ErrorKind::Parameter, "runs_per_level must be >= 1");
    if (config.cvar_grid.empty()) throw Error(ErrorKind::Parameter, "empty CVaR grid");
    for (size_t i = 0; i < config.cvar_grid.size(); ++i) {
        if (!(config.cvar_grid[i] > 0.0)) throw Error(ErrorKind::Parameter, "CVaR grid must be positive");
        if (i > 0 && config.cvar_grid[i] <= config.cvar_grid[i - 1])
            throw Error(ErrorKind::Parameter, "CVaR grid must be ascending");
    }
    if (static_cast<Eigen::Index>(config.spreads_bp.size()) != n)
        throw Error(ErrorKind::Parameter,
                    strfmt("config lists %zu spreads for %lld assets", config.spreads_bp.size(),
                           static_cast<long long>(n)));

    // Rebalance rows: first trading day of the rebalance month each year,
    // eligible once a full lookback window with enough scenario anchors sits
    // behind it and at least one holding row lies ahead.
    std::vector<Window> windows;
    const int min_rows = config.horizon_days + config.min_window_scenarios;
    for (int year = prices.dates.front().year; year <= prices.dates.back().year; ++year) {
        Eigen::Index reb = -1;
        for (Eigen::Index t = 0; t < T; ++t) {
            if (prices.dates[static_cast<size_t>(t)].year == year &&
                prices.dates[static_cast<size_t>(t)].month == config.rebalance_month) {
                reb = t;
                break;
            }
        }
        if (reb < 0 || reb + 1 >= T) continue;
        Date win_start = add_years(prices.dates[static_cast<size_t>(reb)], -config.lookback_years);
        if (prices.dates.front() > win_start) continue;
        Eigen::Index begin = 0;
        while (prices.dates[static_cast<size_t>(begin)] < win_start) ++begin;
        if (reb - begin < min_rows) continue;
        windows.push_back({begin, reb, T - 1});
    }
    if (windows.empty()) {
        Date first_feasible = add_years(prices.dates.front(), config.lookback_years);
        throw Error(ErrorKind::InsufficientData,
                    strfmt("history too short for any rebalance; first feasible rebalance is around %s",
                           format_date(first_feasible).c_str()));
    }
    for (size_t w = 0; w + 1 < windows.size(); ++w) windows[w].hold_end_row = windows[w + 1].rebalance_row;

    const auto n_windows = windows.size();
    const auto n_strat = strategies.size();
    const auto n_lambda = config.cvar_grid.size();
    const auto n_runs = static_cast<size_t>(config.runs_per_level);

    BacktestResult result;
    result.strategies = strategies;
    result.cvar_grid = config.cvar_grid;
    result.tickers = prices.tickers;
    result.runs = config.runs_per_level;
    for (const auto& win : windows) {
        result.rebalance_dates.push_back(prices.dates[static_cast<size_t>(win.rebalance_row)]);
        double days = prices.dates[static_cast<size_t>(win.hold_end_row)].serial() -
                      prices.dates[static_cast<size_t>(win.rebalance_row)].serial();
        result.segment_year_fractions.push_back(days / 365.25);
    }

    // Per-(window, run) tasks; each trains at most one SDG and draws one
    // historical sub-sample, shared across strategies and the whole grid.
    bool any_sdg = false, any_hist = false;
    for (const auto& s : strategies) {
        any_sdg = any_sdg || s.uses_sdg();
        any_hist = any_hist || (!s.uses_sdg() && s.kind != StrategyKind::EW);
    }
    int sdg_count = 0, hist_count = 0;
    for (const auto& s : strategies) {
        if (s.uses_sdg()) sdg_count = std::max(sdg_count, s.scenario_count);
        if (!s.uses_sdg() && s.kind != StrategyKind::EW) hist_count = std::max(hist_count, s.scenario_count);
    }

    std::vector<TaskOutput> outputs(n_windows * n_runs);
    std::atomic<size_t> next_task{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto run_task = [&](size_t task_idx) {
        const size_t w = task_idx / n_runs;
        const size_t r = task_idx % n_runs;
        const Window& win = windows[w];
        const uint64_t task_seed = derive_seed(config.seed, w, r);

        market::ScenarioTable scen = build_window_table(prices, features, win, config.horizon_days);
        const Eigen::Index m_h = scen.n_scenarios();

        // Present-day features, plus the window's feature normalization stats.
        auto [fnorm, fstats] = prep::zscore_fit_apply(scen.F.transpose());
        Eigen::VectorXd f_today = features.yields.col(win.rebalance_row);

        sdg::SyntheticDataset synth;
        bool have_synth = false;
        if (any_sdg) {
            sdg::CtganConfig cfg = config.ctgan;
            cfg.seed = derive_seed(task_seed, 0xaa);
            sdg::SdgModel model = sdg::train_sdg_pipeline(scen, cfg);
            Rng gen_rng(derive_seed(task_seed, 0xbb));
            synth = sdg::generate_synthetic(model, sdg_count, gen_rng);
            have_synth = true;
        }

        Eigen::MatrixXd hist_R;
        Eigen::MatrixXd hist_F;
        if (any_hist) {
            Rng sub_rng(derive_seed(task_seed, 0xcc));
            Eigen::Index take = std::min<Eigen::Index>(hist_count, m_h);
            // Partial Fisher-Yates draw without replacement.
            std::vector<Eigen::Index> pool(static_cast<size_t>(m_h));
            std::iota(pool.begin(), pool.end(), Eigen::Index{0});
            for (Eigen::Index i = 0; i < take; ++i) {
                size_t j = static_cast<size_t>(i) + sub_rng.uniform_int(pool.size() - static_cast<size_t>(i));
                std::swap(pool[static_cast<size_t>(i)], pool[j]);
            }
            hist_R.resize(scen.n_assets(), take);
            hist_F.resize(scen.n_features(), take);
            for (Eigen::Index i = 0; i < take; ++i) {
                hist_R.col(i) = scen.R.col(pool[static_cast<size_t>(i)]);
                hist_F.col(i) = scen.F.col(pool[static_cast<size_t>(i)]);
            }
        }

        TaskOutput& out = outputs[task_idx];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.weights.assign(n_strat, std::vector<Eigen::VectorXd>(n_lambda));
        out.infeasible.assign(n_strat, std::vector<int>(n_lambda, 0));
        out.train_cvar.assign(n_strat, std::vector<double>(n_lambda, nan));
        out.train_objective.assign(n_strat, std::vector<double>(n_lambda, nan));

        for (size_t s = 0; s < n_strat; ++s) {
            const StrategySpec& strat = strategies[s];
            if (strat.kind == StrategyKind::EW) {
                Eigen::VectorXd ew = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
                for (size_t l = 0; l < n_lambda; ++l) out.weights[s][l] = ew;
                continue;
            }
            const Eigen::MatrixXd& R_use = strat.uses_sdg() ? synth.R : hist_R;
            if (strat.uses_sdg() && !have_synth)
                throw Error(ErrorKind::Internal, "strategy needs synthetic data that was not generated");
            cvar::DensityVector density;
            if (strat.uses_features()) {
                const Eigen::MatrixXd& F_use = strat.uses_sdg() ? synth.F : hist_F;
                density = cvar::density_from_features(F_use, f_today, fstats);
            } else {
                density = cvar::uniform_density(R_use.cols());
            }
            for (size_t l = 0; l < n_lambda; ++l) {
                cvar::RiskSpec risk{config.alpha, config.cvar_grid[l]};
                cvar::Allocation alloc = cvar::solve_allocation(R_use, density, risk);
                if (alloc.status == cvar::SolveStatus::Infeasible) {
                    // Risk budget unattainable: hold the least-risky portfolio.
                    out.weights[s][l] = alloc.min_cvar_x;
                    out.infeasible[s][l] = 1;
                } else if (alloc.status == cvar::SolveStatus::Optimal) {
                    out.weights[s][l] = alloc.x;
                    out.train_cvar[s][l] = alloc.empirical_cvar;
                    out.train_objective[s][l] = alloc.objective;
                } else {
                    throw Error(ErrorKind::Numeric,
                                strfmt("solver did not converge (window %zu, run %zu, %s, lambda %.3f)",
                                       w, r, strategy_name(strat.kind), config.cvar_grid[l]));
                }
            }
        }
    };

    const int jobs = std::max(1, config.jobs);
    auto worker = [&]() {
        for (;;) {
            size_t idx = next_task.fetch_add(1);
            if (idx >= outputs.size() || failed.load()) return;
            try {
                run_task(idx);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure_message.empty()) failure_message = e.what();
                return;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error(ErrorKind::Numeric, failure_message);

    // Realized per-asset returns per holding segment.
    std::vector<Eigen::VectorXd> seg_asset_returns;
    for (const auto& win : windows)
        seg_asset_returns.push_back(prices.prices.col(win.hold_end_row)
                                        .cwiseQuotient(prices.prices.col(win.rebalance_row))
                                        .array() -
                                    1.0);

    result.cells.assign(n_strat, std::vector<std::vector<CellResult>>(
                                     n_lambda, std::vector<CellResult>(n_runs)));
    Eigen::VectorXd spreads(n);
    for (Eigen::Index i = 0; i < n; ++i) spreads(i) = config.spreads_bp[static_cast<size_t>(i)];
    double total_years = 0.0;
    for (double f : result.segment_year_fractions) total_years += f;

    for (size_t s = 0; s < n_strat; ++s) {
        for (size_t l = 0; l < n_lambda; ++l) {
            for (size_t r = 0; r < n_runs; ++r) {
                CellResult& cell = result.cells[s][l][r];
                cell.weights.resize(static_cast<Eigen::Index>(n_windows), n);
                std::vector<std::pair<double, double>> segments;
                double hh_sum = 0.0;
                for (size_t w = 0; w < n_windows; ++w) {
                    const TaskOutput& out = outputs[w * n_runs + r];
                    const Eigen::VectorXd& x = out.weights[s][l];
                    cell.weights.row(static_cast<Eigen::Index>(w)) = x.transpose();
                    cell.infeasible_solves += out.infeasible[s][l];
                    cell.train_cvar.push_back(out.train_cvar[s][l]);
                    cell.train_objective.push_back(out.train_objective[s][l]);
                    double ret = x.dot(seg_asset_returns[w]);
                    cell.segment_returns.push_back(ret);
                    cell.year_fractions.push_back(result.segment_year_fractions[w]);
                    segments.push_back({ret, result.segment_year_fractions[w]});
                    hh_sum += hh_index(x);
                }
                cell.annualized_return = annualized_return(segments);
                cell.cvar_ex_post = cvar_ex_post(cell.segment_returns, config.alpha);
                cell.mean_hh = hh_sum / static_cast<double>(n_windows);
                cell.rotation = n_windows >= 2 ? rotation(cell.weights) : 0.0;
                cell.expense_bp = n_windows >= 2 ? transaction_expense_bp(cell.weights, spreads, total_years) : 0.0;
                cell.net_return = cell.annualized_return - cell.expense_bp * 1e-4;
            }
        }
    }
    return result;
}

CellStats BacktestResult::aggregate(size_t s, size_t l, double CellResult::* metric) const {
    CellStats stats;
    const auto& runs_vec = cells[s][l];
    double sum = 0.0;
    for (const auto& cell : runs_vec) sum += cell.*metric;
    stats.mean = sum / static_cast<double>(runs_vec.size());
    double var = 0.0;
    for (const auto& cell : runs_vec) {
        double d = cell.*metric - stats.mean;
        var += d * d;
    }
    stats.stddev = std::sqrt(var / static_cast<double>(runs_vec.size()));
    return stats;
}

void write_backtest_outputs(const BacktestResult& result, const std::string& out_dir,
                            const std::vector<std::string>& comments) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const std::vector<std::pair<const char*, double CellResult::*>> metrics = {
        {"annualized_return", &CellResult::annualized_return},
        {"cvar_ex_post", &CellResult::cvar_ex_post},
        {"hh_index", &CellResult::mean_hh},
        {"rotation", &CellResult::rotation},
        {"expense_bp", &CellResult::expense_bp},
        {"net_return", &CellResult::net_return},
    };

    {
        std::vector<std::vector<std::string>> rows;
        for (size_t s = 0; s < result.strategies.size(); ++s)
            for (size_t l = 0; l < result.cvar_grid.size(); ++l)
                for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r)
                    for (auto& [name, member] : metrics)
                        rows.push_back({strategy_name(result.strategies[s].kind),
                                        fmt_double(result.cvar_grid[l]), std::to_string(r), name,
                                        fmt_double(result.cell(s, l, r).*member)});
        write_csv((fs::path(out_dir) / "results.csv").string(), comments,
                  {"strategy", "lambda", "run", "metric", "value"}, rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (size_t s = 0; s < result.strategies.size(); ++s)
            for (size_t l = 0; l < result.cvar_grid.size(); ++l)
                for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r) {
                    const auto& cell = result.cell(s, l, r);
                    for (Eigen::Index w = 0; w < cell.weights.rows(); ++w)
                        for (Eigen::Index a = 0; a < cell.weights.cols(); ++a)
                            rows.push_back({strategy_name(result.strategies[s].kind),
                                            fmt_double(result.cvar_grid[l]), std::to_string(r),
                                            format_date(result.rebalance_dates[static_cast<size_t>(w)]),
                                            result.tickers[static_cast<size_t>(a)],
                                            fmt_double(cell.weights(w, a))});
                }
        write_csv((fs::path(out_dir) / "weights.csv").string(), comments,
                  {"strategy", "lambda", "run", "rebalance_date", "asset", "weight"}, rows);
    }

    {
        nlohmann::json j;
        for (const auto& c : comments) j["_meta"].push_back(c);
        j["rebalance_dates"] = nlohmann::json::array();
        for (const auto& d : result.rebalance_dates) j["rebalance_dates"].push_back(format_date(d));
        j["segment_year_fractions"] = result.segment_year_fractions;
        j["runs"] = result.runs;
        nlohmann::json tables = nlohmann::json::object();
        for (auto& [name, member] : metrics) {
            nlohmann::json table = nlohmann::json::array();
            for (size_t l = 0; l < result.cvar_grid.size(); ++l) {
                nlohmann::json row;
                row["lambda"] = result.cvar_grid[l];
                for (size_t s = 0; s < result.strategies.size(); ++s) {
                    auto stats = result.aggregate(s, l, member);
                    row[strategy_name(result.strategies[s].kind)] =
                        nlohmann::json{{"mean", stats.mean}, {"std", stats.stddev}};
                }
                table.push_back(row);
            }
            tables[name] = table;
        }
        j["tables"] = tables;
        write_text_file((fs::path(out_dir) / "summary.json").string(), j.dump(1));
    }
}

}  // namespace scenalloc::backtest

// Acceptance suite: runs every criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit code 0 only when everything passes.
//
//   acceptance_tests                 runs all criteria
//   acceptance_tests --criterion N   runs one
//   acceptance_tests --list          lists them

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenalloc/backtest.hpp"
#include "scenalloc/errors.hpp"
#include "scenalloc/cli.hpp"
#include "scenalloc/csv.hpp"
#include "scenalloc/ctgan.hpp"
#include "scenalloc/cvar.hpp"
#include "scenalloc/fixture.hpp"
#include "scenalloc/nn.hpp"
#include "scenalloc/pca.hpp"
#include "scenalloc/rng.hpp"
#include "scenalloc/validate.hpp"
#include "scenalloc/vgm.hpp"

using namespace scenalloc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, long long> cont;
    std::map<int, long long> row, col;
    for (size_t i = 0; i < a.size(); ++i) {
        cont[{a[i], b[i]}]++;
        row[a[i]]++;
        col[b[i]]++;
    }
    auto choose2 = [](long long x) { return x * (x - 1) / 2.0; };
    double sum_cont = 0, sum_row = 0, sum_col = 0;
    for (auto& [k, v] : cont) sum_cont += choose2(v);
    for (auto& [k, v] : row) sum_row += choose2(v);
    for (auto& [k, v] : col) sum_col += choose2(v);
    double total = choose2(static_cast<long long>(a.size()));
    double expected = sum_row * sum_col / total;
    double max_index = 0.5 * (sum_row + sum_col);
    if (max_index == expected) return 1.0;
    return (sum_cont - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// 1. LP oracle equivalence on 200 random instances, under 10 seconds.

Outcome criterion_lp_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(424242);
    const double alphas[] = {0.5, 0.75, 0.9};
    int checked = 0;
    double worst_gap = 0.0;

    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_int(3));
        int m = 2 + static_cast<int>(rng.uniform_int(11));
        Eigen::MatrixXd R(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) R(i, j) = 0.4 * (rng.uniform() - 0.45);
        cvar::DensityVector d;
        d.weights.resize(m);
        for (int j = 0; j < m; ++j) d.weights(j) = 0.1 + rng.uniform();
        d.weights /= d.weights.sum();
        cvar::RiskSpec risk;
        risk.alpha = alphas[rng.uniform_int(3)];
        Eigen::VectorXd xr(n);
        for (int i = 0; i < n; ++i) xr(i) = rng.uniform() + 1e-3;
        xr /= xr.sum();
        risk.lambda = std::max(0.01, cvar::empirical_cvar(R, xr, d, risk.alpha)) + 0.02 + 0.3 * rng.uniform();

        auto alloc = cvar::solve_allocation(R, d, risk);
        if (alloc.status != cvar::SolveStatus::Optimal)
            return {false, strfmt("instance %d did not solve", trial)};
        if (alloc.empirical_cvar > risk.lambda + 1e-6)
            return {false, strfmt("instance %d violates the budget", trial)};

        // Brute force over the weight simplex, step 1e-3.
        const double step = 1e-3;
        const int ticks = 1000;
        double best = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd x(n);
        auto eval = [&]() {
            if (cvar::empirical_cvar(R, x, d, risk.alpha) <= risk.lambda + 1e-12)
                best = std::max(best, cvar::expected_return(R, x, d));
        };
        if (n == 1) {
            x(0) = 1.0;
            eval();
        } else if (n == 2) {
            for (int i = 0; i <= ticks; ++i) {
                x(0) = i * step;
                x(1) = 1.0 - x(0);
                eval();
            }
        } else {
            for (int i = 0; i <= ticks; ++i)
                for (int j = 0; j <= ticks - i; ++j) {
                    x(0) = i * step;
                    x(1) = j * step;
                    x(2) = 1.0 - x(0) - x(1);
                    eval();
                }
        }
        if (!std::isfinite(best)) return {false, strfmt("instance %d: oracle found no feasible point", trial)};
        double gap = std::abs(alloc.objective - best);
        worst_gap = std::max(worst_gap, gap);
        if (alloc.objective < best - 1e-6)
            return {false, strfmt("instance %d: solver below a feasible grid point by %.2g", trial,
                                  best - alloc.objective)};
        if (gap > 1e-3) return {false, strfmt("instance %d: |objective - oracle| = %.2g > 1e-3", trial, gap)};
        ++checked;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed >= 10.0) return {false, strfmt("200 instances took %.1f s (budget 10 s)", elapsed)};
    return {true, strfmt("%d instances, worst gap %.2e, %.1f s", checked, worst_gap, elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Hand-checked LP: x = (0.6, 0.4), objective 0.11 within 1e-6.

Outcome criterion_hand_checked_lp() {
    Eigen::MatrixXd R(2, 2);
    R << 0.5, -0.2, 0.05, 0.05;
    auto alloc = cvar::solve_allocation(R, cvar::uniform_density(2), cvar::RiskSpec{0.5, 0.10});
    if (alloc.status != cvar::SolveStatus::Optimal) return {false, "solver failed"};
    double ex = std::abs(alloc.x(0) - 0.6), ey = std::abs(alloc.x(1) - 0.4);
    double eobj = std::abs(alloc.objective - 0.11);
    if (ex > 1e-6 || ey > 1e-6 || eobj > 1e-6)
        return {false, strfmt("x=(%.8f, %.8f) obj=%.8f", alloc.x(0), alloc.x(1), alloc.objective)};
    return {true, strfmt("x=(%.6f, %.6f), objective %.6f", alloc.x(0), alloc.x(1), alloc.objective)};
}

// ---------------------------------------------------------------------------
// Shared small historical backtest used by criteria 3 and 8.

backtest::BacktestResult small_hist_backtest() {
    auto spec = fixture::dominant_asset_spec(101);
    spec.start = Date{2003, 1, 1};
    spec.end = Date{2009, 6, 30};
    auto fix = fixture::generate_fixture(spec);
    backtest::BacktestConfig config;
    config.lookback_years = 3;
    config.runs_per_level = 2;
    config.alpha = 0.95;
    config.horizon_days = 252;
    config.min_window_scenarios = 200;
    config.spreads_bp = {0.36, 2.69, 1.35, 14.1};
    config.seed = 7;
    config.jobs = 2;
    std::vector<backtest::StrategySpec> strategies = {{backtest::StrategyKind::HwoF, 500},
                                                      {backtest::StrategyKind::HwF, 500},
                                                      {backtest::StrategyKind::EW, 500}};
    return backtest::run_backtest(fix.prices, fix.features, config, strategies);
}

// 3. CVaR feasibility ex ante and lambda-monotonicity across the grid.

Outcome check_feasibility_and_monotonicity(const backtest::BacktestResult& result) {
    int optimal_solves = 0;
    for (size_t s = 0; s < result.strategies.size(); ++s) {
        if (result.strategies[s].kind == backtest::StrategyKind::EW) continue;
        for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r) {
            for (size_t w = 0; w < result.rebalance_dates.size(); ++w) {
                double prev_obj = -std::numeric_limits<double>::infinity();
                for (size_t l = 0; l < result.cvar_grid.size(); ++l) {
                    const auto& cell = result.cell(s, l, r);
                    double cv = cell.train_cvar[w];
                    double obj = cell.train_objective[w];
                    if (!std::isfinite(cv)) continue;  // infeasible solve, no feasibility claim
                    ++optimal_solves;
                    if (cv > result.cvar_grid[l] + 1e-6)
                        return {false, strfmt("%s run %zu window %zu lambda %.3f: train CVaR %.6f",
                                              strategy_name(result.strategies[s].kind), r, w,
                                              result.cvar_grid[l], cv)};
                    if (obj < prev_obj - 1e-9)
                        return {false, strfmt("%s run %zu window %zu: objective fell from %.6f to %.6f",
                                              strategy_name(result.strategies[s].kind), r, w, prev_obj, obj)};
                    prev_obj = obj;
                }
            }
        }
    }
    return {true, strfmt("%d optimal solves feasible ex ante, objectives monotone in lambda", optimal_solves)};
}

Outcome criterion_cvar_feasibility() {
    auto result = small_hist_backtest();
    return check_feasibility_and_monotonicity(result);
}

// ---------------------------------------------------------------------------
// 4. Pipeline plumbing identity: encode+decode within 1e-6, PCA within 1e-8.

Outcome criterion_pipeline_identity() {
    auto [table, labels] = fixture::two_regime_scenarios(500, 2024);
    Eigen::MatrixXd data(table.n_scenarios(), table.n_assets() + table.n_features());
    data << table.R.transpose(), table.F.transpose();

    auto pca = prep::pca_fit(data);
    Eigen::MatrixXd scores = prep::pca_transform(pca, data);
    double pca_err = (prep::pca_inverse(pca, scores) - data).cwiseAbs().maxCoeff();
    if (pca_err > 1e-8) return {false, strfmt("PCA round trip error %.2e > 1e-8", pca_err)};

    sdg::DataEncoder encoder;
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
        encoder.columns.push_back(prep::vgm_fit_column(scores.col(c)));
    encoder.n_clusters = 2;
    Eigen::MatrixXd encoded = encoder.encode(scores, labels);
    Eigen::MatrixXd decoded = prep::pca_inverse(pca, encoder.decode_scores(encoded));
    double full_err = (decoded - data).cwiseAbs().maxCoeff();
    if (full_err > 1e-6) return {false, strfmt("encode/decode error %.2e > 1e-6", full_err)};
    return {true, strfmt("PCA %.2e <= 1e-8, encode/decode %.2e <= 1e-6 on %lld rows", pca_err, full_err,
                         static_cast<long long>(data.rows()))};
}

// ---------------------------------------------------------------------------
// 5. Gradient checks against central finite differences, < 1e-4 relative.

double grad_check_worst(const std::vector<Eigen::MatrixXd*>& params,
                        const std::vector<Eigen::MatrixXd*>& grads,
                        const std::function<double()>& loss_fn) {
    const double step = 1e-5;
    double worst = 0.0;
    for (size_t p = 0; p < params.size(); ++p) {
        Eigen::MatrixXd& w = *params[p];
        const Eigen::MatrixXd& g = *grads[p];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                double saved = w(i, j);
                w(i, j) = saved + step;
                double up = loss_fn();
                w(i, j) = saved - step;
                double down = loss_fn();
                w(i, j) = saved;
                double numeric = (up - down) / (2.0 * step);
                double denom = std::max({1e-6, std::abs(numeric), std::abs(g(i, j))});
                worst = std::max(worst, std::abs(numeric - g(i, j)) / denom);
            }
    }
    return worst;
}

Outcome criterion_gradient_checks() {
    using namespace scenalloc::sdg;
    // Miniature generator with the full output head (tanh + gumbel-softmax +
    // conditional cross-entropy), batch-norm in training mode.
    Rng rng(7);
    Generator gen(5, {4, 3}, 8, rng);
    const Eigen::Index batch = 6;
    Eigen::MatrixXd input(batch, 5), gumbel(batch, 8);
    for (Eigen::Index i = 0; i < batch; ++i) {
        for (int j = 0; j < 5; ++j) input(i, j) = rng.normal();
        for (int j = 0; j < 8; ++j) gumbel(i, j) = rng.gumbel();
    }
    std::vector<OutputSpan> spans{{0, 1, false}, {1, 2, true}, {3, 1, false}, {4, 2, true}, {6, 2, true}};
    std::vector<int> targets;
    for (Eigen::Index i = 0; i < batch; ++i) targets.push_back(static_cast<int>(i % 2));
    const double tau = 0.4;

    auto gen_loss = [&](Generator::Cache* cache, Eigen::MatrixXd* raw_out, Eigen::MatrixXd* act_out) {
        std::vector<Eigen::VectorXd> sm, sv;
        for (auto& n : gen.norms) {
            sm.push_back(n.running_mean);
            sv.push_back(n.running_var);
        }
        Eigen::MatrixXd raw = gen.forward(input, true, cache);
        Eigen::MatrixXd act = apply_activations(raw, spans, tau, gumbel);
        for (size_t i = 0; i < gen.norms.size(); ++i) {
            gen.norms[i].running_mean = sm[i];
            gen.norms[i].running_var = sv[i];
        }
        if (raw_out) *raw_out = raw;
        if (act_out) *act_out = act;
        Eigen::MatrixXd dummy = Eigen::MatrixXd::Zero(batch, 8);
        double ce = cross_entropy_block(raw, spans.back(), targets, dummy);
        return 0.5 * act.array().square().sum() / batch + ce;
    };
    for (auto* g : gen.gradients()) g->setZero();
    Generator::Cache cache;
    Eigen::MatrixXd raw, act;
    gen_loss(&cache, &raw, &act);
    Eigen::MatrixXd d_raw = activations_backward(act, spans, tau, act / static_cast<double>(batch));
    cross_entropy_block(raw, spans.back(), targets, d_raw);
    gen.backward(cache, d_raw);
    double gen_err = grad_check_worst(gen.parameters(), gen.gradients(),
                                      [&]() { return gen_loss(nullptr, nullptr, nullptr); });

    // Miniature critic with the full WGAN-GP loss (double backprop included).
    Rng drng(13);
    const int pac = 2;
    Discriminator disc(5 * pac, {6, 4}, drng);
    const Eigen::Index groups = 4;
    Eigen::MatrixXd real(groups, 10), fake(groups, 10), interp(groups, 10);
    for (Eigen::Index i = 0; i < groups; ++i)
        for (int j = 0; j < 10; ++j) {
            real(i, j) = drng.normal();
            fake(i, j) = drng.normal();
            double a = drng.uniform();
            interp(i, j) = a * real(i, j) + (1 - a) * fake(i, j);
        }
    auto disc_loss = [&]() {
        Eigen::VectorXd y_fake = disc.forward(fake, nullptr, nullptr);
        Eigen::VectorXd y_real = disc.forward(real, nullptr, nullptr);
        std::vector<Eigen::MatrixXd> saved;
        for (auto* g : disc.gradients()) saved.push_back(*g);
        double gp = disc.gradient_penalty(interp, 10.0, nullptr);
        auto grads = disc.gradients();
        for (size_t i = 0; i < grads.size(); ++i) *grads[i] = saved[i];
        return y_fake.mean() - y_real.mean() + gp;
    };
    for (auto* g : disc.gradients()) g->setZero();
    Discriminator::Cache fc, rc;
    disc.forward(fake, nullptr, &fc);
    disc.forward(real, nullptr, &rc);
    disc.backward(fc, Eigen::VectorXd::Constant(groups, 1.0 / groups), true);
    disc.backward(rc, Eigen::VectorXd::Constant(groups, -1.0 / groups), true);
    disc.gradient_penalty(interp, 10.0, nullptr);
    double disc_err = grad_check_worst(disc.parameters(), disc.gradients(), disc_loss);

    if (gen_err >= 1e-4 || disc_err >= 1e-4)
        return {false, strfmt("max relative error: generator %.2e, critic %.2e", gen_err, disc_err)};
    return {true, strfmt("max relative error: generator %.2e, critic %.2e (< 1e-4)", gen_err, disc_err)};
}

// ---------------------------------------------------------------------------
// 6. SDG fidelity at desk scale, default training configuration.

Outcome criterion_sdg_fidelity() {
    auto [table, labels] = fixture::two_regime_scenarios(500, 2024);
    sdg::CtganConfig config;  // stock architecture, epochs and rates
    config.seed = 2024;
    auto model = sdg::train_sdg_pipeline(table, config);
    Rng rng(77);
    auto synth = sdg::generate_synthetic(model, 1000, rng);
    auto report = validate::validation_report(table, synth.as_table());

    int copies = 0;
    for (Eigen::Index s = 0; s < synth.R.cols(); ++s)
        for (Eigen::Index j = 0; j < table.n_scenarios(); ++j)
            if ((synth.R.col(s) - table.R.col(j)).cwiseAbs().maxCoeff() < 1e-9 &&
                (synth.F.col(s) - table.F.col(j)).cwiseAbs().maxCoeff() < 1e-9) {
                ++copies;
                break;
            }
    double copy_rate = static_cast<double>(copies) / static_cast<double>(synth.R.cols());

    std::string detail = strfmt(
        "mean KS %.4f (gate 0.75, aspirational reference 0.87), min corr-sim %.4f "
        "(gate 0.70, aspirational reference 0.83), copy rate %.2f%%",
        report.mean_ks, report.min_corr_sim, 100.0 * copy_rate);
    if (report.mean_ks < 0.75 || report.min_corr_sim < 0.70 || copy_rate >= 0.01)
        return {false, detail};
    return {true, detail};
}

// ---------------------------------------------------------------------------
// 7. Regime recovery: clustering ARI >= 0.9 on the two-regime fixture.

Outcome criterion_regime_recovery() {
    auto [table, labels] = fixture::two_regime_scenarios(500, 2024);
    sdg::CtganConfig config;
    config.seed = 2024;
    config.epochs = 0;  // clustering happens before adversarial training
    auto model = sdg::train_sdg_pipeline(table, config);
    double ari = adjusted_rand_index(model.clusters.labels, labels);
    if (model.clusters.k != 2 || ari < 0.9)
        return {false, strfmt("k=%d, ARI=%.4f", model.clusters.k, ari)};
    return {true, strfmt("k=2, ARI=%.4f (>= 0.9)", ari)};
}

// ---------------------------------------------------------------------------
// 8. Backtest arithmetic: EW rows, compounding, net return identity.

Outcome criterion_backtest_arithmetic() {
    double cumulative = std::pow(1.1678, 14.5);
    if (std::abs(cumulative - 9.48) > 0.01)
        return {false, strfmt("16.78%% over 14.5y compounds to %.4f, expected 9.48 +- 0.01", cumulative)};
    double back = backtest::annualized_return({{cumulative - 1.0, 14.5}});
    if (std::abs(back - 0.1678) > 1e-9)
        return {false, strfmt("annualization inverse gave %.6f", back)};

    auto result = small_hist_backtest();
    size_t ew = result.strategies.size();
    for (size_t s = 0; s < result.strategies.size(); ++s)
        if (result.strategies[s].kind == backtest::StrategyKind::EW) ew = s;
    if (ew == result.strategies.size()) return {false, "no EW strategy in the backtest"};

    for (size_t l = 0; l < result.cvar_grid.size(); ++l)
        for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r) {
            const auto& cell = result.cell(ew, l, r);
            if (cell.rotation != 0.0) return {false, strfmt("EW rotation %.3e != 0", cell.rotation)};
            if (cell.mean_hh != 1.0) return {false, strfmt("EW HH %.17g != 1", cell.mean_hh)};
        }

    for (size_t s = 0; s < result.strategies.size(); ++s)
        for (size_t l = 0; l < result.cvar_grid.size(); ++l)
            for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r) {
                const auto& cell = result.cell(s, l, r);
                if (cell.net_return != cell.annualized_return - cell.expense_bp * 1e-4)
                    return {false, "net return is not gross minus expense"};
            }
    return {true, strfmt("EW rotation 0 and HH 1 exactly; 1.1678^14.5 = %.4f; net = gross - expense",
                         cumulative)};
}

// ---------------------------------------------------------------------------
// 9. End-to-end fixture backtest with all five strategies.

Outcome criterion_end_to_end() {
    auto t0 = std::chrono::steady_clock::now();
    auto spec = fixture::dominant_asset_spec(909);
    auto fix = fixture::generate_fixture(spec);

    backtest::BacktestConfig config;
    config.lookback_years = 5;
    config.runs_per_level = 5;
    config.alpha = 0.95;
    config.spreads_bp = {0.36, 2.69, 1.35, 14.1};
    config.seed = 909;
    config.jobs = 2;
    config.ctgan.epochs = 120;          // training budget per window
    config.ctgan.tsne_iterations = 500;
    config.ctgan.seed = 909;

    auto strategies = backtest::all_strategies(500);
    auto result = backtest::run_backtest(fix.prices, fix.features, config, strategies);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (result.cvar_grid.size() != 10 || result.runs != 5 || result.strategies.size() != 5)
        return {false, "grid shape is not 5 strategies x 10 levels x 5 runs"};

    double worst_weight = 1.0;
    for (size_t s = 0; s < result.strategies.size(); ++s) {
        if (result.strategies[s].kind == backtest::StrategyKind::EW) continue;
        for (size_t l = 0; l < result.cvar_grid.size(); ++l)
            for (size_t r = 0; r < static_cast<size_t>(result.runs); ++r) {
                const auto& w = result.cell(s, l, r).weights;
                for (Eigen::Index row = 0; row < w.rows(); ++row)
                    worst_weight = std::min(worst_weight, w(row, 0));
            }
    }
    if (worst_weight < 0.99)
        return {false, strfmt("dominant asset received only %.4f somewhere (need >= 0.99)", worst_weight)};

    auto feas = check_feasibility_and_monotonicity(result);
    if (!feas.pass) return feas;

    if (elapsed >= 7200.0) return {false, strfmt("grid took %.0f s (budget 7200 s)", elapsed)};
    return {true, strfmt("%zu rebalances, min dominant weight %.4f, %.0f s (< 2 h); %s",
                         result.rebalance_dates.size(), worst_weight, elapsed, feas.detail.c_str())};
}

// ---------------------------------------------------------------------------
// 10. Determinism: identical config + seed give byte-identical result CSVs.

Outcome criterion_determinism() {
    namespace fs = std::filesystem;
    auto base = fs::temp_directory_path() / "scenalloc_acceptance" / "determinism";
    fs::remove_all(base);
    fs::create_directories(base);

    auto spec = fixture::dominant_asset_spec(31);
    spec.end = Date{2009, 6, 30};
    auto fix = fixture::generate_fixture(spec);
    fixture::write_fixture_csv(fix, (base / "fix").string(), {"# determinism fixture"});

    std::string config_text = strfmt(R"(
seed = 31

[data]
prices = "%s"
yields = "%s"

[ingest]
horizon_days = 252

[ctgan]
epochs = 30
tsne_iterations = 300

[backtest]
lookback_years = 3
cvar_grid = [0.1, 0.2]
runs_per_level = 2
alpha = 0.95
spreads_bp = [0.36, 2.69, 1.35, 14.1]
jobs = 2
strategies = ["Gw/oF", "HwF", "EW"]
)",
                                     (base / "fix" / "prices.csv").string().c_str(),
                                     (base / "fix" / "yields.csv").string().c_str());
    write_text_file((base / "run.toml").string(), config_text);

    auto run_once = [&](const std::string& out_dir) {
        std::vector<std::string> args{"scenalloc", "--config", (base / "run.toml").string(), "--out",
                                      out_dir, "backtest"};
        std::vector<const char*> argv;
        for (auto& a : args) argv.push_back(a.c_str());
        return cli::dispatch(static_cast<int>(argv.size()), argv.data());
    };
    if (run_once((base / "a").string()) != 0) return {false, "first backtest run failed"};
    if (run_once((base / "b").string()) != 0) return {false, "second backtest run failed"};

    for (const char* file : {"results.csv", "weights.csv", "summary.json"}) {
        auto a = read_text_file((base / "a" / "backtest" / file).string());
        auto b = read_text_file((base / "b" / "backtest" / file).string());
        if (a != b) return {false, strfmt("%s differs between identical runs", file)};
    }
    return {true, "results.csv, weights.csv and summary.json byte-identical across reruns"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "LP oracle equivalence (200 random instances, < 10 s)", criterion_lp_oracle},
        {2, "hand-checked LP: x=(0.6,0.4), objective 0.11 +- 1e-6", criterion_hand_checked_lp},
        {3, "CVaR feasibility ex ante and lambda-monotonicity", criterion_cvar_feasibility},
        {4, "pipeline identity: encode/decode 1e-6, PCA 1e-8", criterion_pipeline_identity},
        {5, "gradient checks vs central differences (< 1e-4)", criterion_gradient_checks},
        {6, "SDG fidelity: mean KS >= 0.75, min corr-sim >= 0.70, copies < 1%", criterion_sdg_fidelity},
        {7, "regime recovery: clustering ARI >= 0.9", criterion_regime_recovery},
        {8, "backtest arithmetic: EW rows, compounding, net identity", criterion_backtest_arithmetic},
        {9, "end-to-end dominance backtest, 5x10x5 grid under 2 h", criterion_end_to_end},
        {10, "determinism: byte-identical result CSVs", criterion_determinism},
    };

    int only = -1;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& c : criteria) std::printf("%2d  %s\n", c.id, c.name);
            return 0;
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N | --list]\n", argv[0]);
            return 2;
        }
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (only > 0 && c.id != only) continue;
        double t0 = now_seconds();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, strfmt("exception: %s", e.what())};
        }
        double dt = now_seconds() - t0;
        std::printf("[%s] criterion %d: %s | %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", c.id,
                    c.name, outcome.detail.c_str(), dt);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (only > 0 && failures == 0) return 0;
    if (failures > 0) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all criteria passed\n");
    return failures == 0 ? 0 : 1;
}

#include "scenalloc/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "scenalloc/backtest.hpp"
#include "scenalloc/csv.hpp"
#include "scenalloc/ctgan.hpp"
#include "scenalloc/errors.hpp"
#include "scenalloc/fixture.hpp"
#include "scenalloc/market_data.hpp"
#include "scenalloc/model_io.hpp"
#include "scenalloc/report.hpp"
#include "scenalloc/run_config.hpp"
#include "scenalloc/validate.hpp"

namespace scenalloc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::optional<uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> epochs;
};

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg;
    std::string path = opts.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SCENALLOC_CONFIG")) path = env;
    }
    if (!path.empty()) cfg = RunConfig::from_toml_file(path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.backtest.seed = *opts.seed;
        cfg.backtest.ctgan.seed = *opts.seed;
    }
    if (opts.jobs) cfg.backtest.jobs = *opts.jobs;
    if (opts.epochs) cfg.backtest.ctgan.epochs = *opts.epochs;
    if (!opts.out.empty()) cfg.output_dir = opts.out;
    return cfg;
}

std::vector<std::string> meta(const RunConfig& cfg) { return {cfg.meta_comment()}; }

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

Eigen::VectorXd parse_number_list(const std::string& text) {
    std::vector<double> values;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) {
                char* end = nullptr;
                double v = std::strtod(cur.c_str(), &end);
                if (end == cur.c_str() || *end != '\0')
                    throw Error(ErrorKind::Parameter, strfmt("bad number '%s'", cur.c_str()));
                values.push_back(v);
                cur.clear();
            }
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_fixture(const CommonOpts& common, const std::string& preset) {
    RunConfig cfg = load_config(common);
    if (!preset.empty()) cfg.fixture_preset = preset;
    auto spec = cfg.fixture_spec();
    auto result = fixture::generate_fixture(spec);
    fixture::write_fixture_csv(result, cfg.output_dir, meta(cfg));
    std::printf("fixture: %s, %lld days x %d assets -> %s\n", cfg.fixture_preset.c_str(),
                static_cast<long long>(result.prices.n_dates()), spec.n_assets, cfg.output_dir.c_str());
    return 0;
}

int cmd_ingest(const CommonOpts& common, std::string prices, std::string yields) {
    RunConfig cfg = load_config(common);
    if (prices.empty()) prices = cfg.prices_path;
    if (yields.empty()) yields = cfg.yields_path;
    market::IngestReport report;
    auto [price_table, feature_table] = market::load_market_csv(prices, yields, cfg.ingest, &report);
    auto scen = market::build_scenario_table(price_table, feature_table, cfg.ingest.horizon_days);
    fs::create_directories(cfg.output_dir);
    market::write_scenario_csv((fs::path(cfg.output_dir) / "scenarios.csv").string(), scen, nullptr,
                               meta(cfg));
    json j{{"dates", price_table.n_dates()},
           {"assets", price_table.n_assets()},
           {"features", feature_table.n_features()},
           {"scenarios", scen.n_scenarios()},
           {"horizon_days", cfg.ingest.horizon_days},
           {"dropped_price_rows", report.dropped_price_rows},
           {"dropped_yield_rows", report.dropped_yield_rows},
           {"dropped_alignment", report.dropped_alignment},
           {"_meta", meta(cfg)}};
    write_json((fs::path(cfg.output_dir) / "ingest_report.json").string(), j);
    std::printf("ingest: %lld aligned dates, %lld scenarios (dropped %d/%d/%d) -> %s\n",
                static_cast<long long>(price_table.n_dates()), static_cast<long long>(scen.n_scenarios()),
                report.dropped_price_rows, report.dropped_yield_rows, report.dropped_alignment,
                cfg.output_dir.c_str());
    return 0;
}

market::ScenarioTable load_history(const RunConfig& cfg, const std::string& prices,
                                   const std::string& yields, const std::string& window_start,
                                   const std::string& window_end) {
    auto [price_table, feature_table] = market::load_market_csv(
        prices.empty() ? cfg.prices_path : prices, yields.empty() ? cfg.yields_path : yields, cfg.ingest,
        nullptr);
    auto scen = market::build_scenario_table(price_table, feature_table, cfg.ingest.horizon_days);
    if (!window_start.empty() || !window_end.empty()) {
        Date start = window_start.empty() ? scen.dates.front() : parse_date(window_start);
        Date end = window_end.empty() ? scen.dates.back() : parse_date(window_end);
        scen = market::slice_window(scen, start, end);
    }
    return scen;
}

int cmd_sdg_train(const CommonOpts& common, const std::string& prices, const std::string& yields,
                  const std::string& window_start, const std::string& window_end,
                  const std::string& model_out) {
    RunConfig cfg = load_config(common);
    auto scen = load_history(cfg, prices, yields, window_start, window_end);
    sdg::CtganConfig cc = cfg.backtest.ctgan;
    cc.seed = cfg.seed;
    auto model = sdg::train_sdg_pipeline(scen, cc);
    fs::create_directories(fs::path(model_out).parent_path().empty() ? "." : fs::path(model_out).parent_path().string());
    sdg::save_model(model, model_out);
    std::printf("sdg train: %lld scenarios, k=%d clusters, %lld-dim encoding -> %s\n",
                static_cast<long long>(scen.n_scenarios()), model.clusters.k,
                static_cast<long long>(model.encoder.encoded_dim()), model_out.c_str());
    return 0;
}

int cmd_sdg_generate(const CommonOpts& common, const std::string& model_path, int count,
                     const std::string& out_file) {
    RunConfig cfg = load_config(common);
    auto model = sdg::load_model(model_path);
    Rng rng(derive_seed(cfg.seed, 0x9e4));
    auto synth = sdg::generate_synthetic(model, count, rng);
    auto table = synth.as_table();
    market::write_scenario_csv(out_file, table, &synth.cluster_ids, meta(cfg));
    std::printf("sdg generate: %d synthetic scenarios -> %s\n", count, out_file.c_str());
    return 0;
}

int cmd_validate(const CommonOpts& common, const std::string& original_path,
                 const std::string& synthetic_path) {
    RunConfig cfg = load_config(common);
    auto original = market::read_scenario_csv(original_path);
    auto synthetic = market::read_scenario_csv(synthetic_path);
    auto report = validate::validation_report(original.table, synthetic.table);
    validate::write_validation_artifacts(report, original.table, synthetic.table, cfg.output_dir,
                                         meta(cfg));
    std::printf("validate: mean KS-complement %.4f, min correlation similarity %.4f -> %s\n",
                report.mean_ks, report.min_corr_sim, cfg.output_dir.c_str());
    return 0;
}

int cmd_optimize(const CommonOpts& common, const std::string& scenarios_path,
                 const std::string& features_path, const std::string& today_arg,
                 const std::string& today_csv, double alpha, std::vector<double> lambdas,
                 const std::string& out_file) {
    RunConfig cfg = load_config(common);
    auto scen = market::read_scenario_csv(scenarios_path);
    if (lambdas.empty()) lambdas.push_back(cfg.risk.lambda);
    if (alpha <= 0.0) alpha = cfg.risk.alpha;

    Eigen::MatrixXd F = scen.table.F;
    if (!features_path.empty()) {
        auto feat = market::read_scenario_csv(features_path);
        // A plain features file parses its columns as "returns"; either
        // prefixed or plain layouts are accepted.
        F = feat.table.F.size() > 0 ? feat.table.F : feat.table.R;
    }

    cvar::DensityVector density;
    bool with_features = !today_arg.empty() || !today_csv.empty();
    if (with_features) {
        if (F.size() == 0)
            throw Error(ErrorKind::Parameter, "present-day features given but no sample features found");
        Eigen::VectorXd today;
        if (!today_csv.empty()) {
            auto t = market::read_scenario_csv(today_csv);
            const Eigen::MatrixXd& m = t.table.F.size() > 0 ? t.table.F : t.table.R;
            if (m.cols() != 1)
                throw Error(ErrorKind::Parameter, "present-day feature file must hold exactly one row");
            today = m.col(0);
        } else {
            today = parse_number_list(today_arg);
        }
        if (F.cols() < 2) throw Error(ErrorKind::Parameter, "need at least 2 feature samples");
        auto [norm, stats] = prep::zscore_fit_apply(F.transpose());
        density = cvar::density_from_features(F, today, stats);
    } else {
        density = cvar::uniform_density(scen.table.R.cols());
    }

    json results = json::array();
    for (double lambda : lambdas) {
        auto alloc = cvar::solve_allocation(scen.table.R, density, cvar::RiskSpec{alpha, lambda});
        json j;
        j["alpha"] = alpha;
        j["lambda"] = lambda;
        j["feature_weighted"] = with_features;
        switch (alloc.status) {
            case cvar::SolveStatus::Optimal: {
                j["status"] = "optimal";
                json weights = json::object();
                for (Eigen::Index i = 0; i < alloc.x.size(); ++i)
                    weights[scen.table.tickers[static_cast<size_t>(i)]] = alloc.x(i);
                j["weights"] = weights;
                j["xi"] = alloc.xi;
                j["objective"] = alloc.objective;
                j["empirical_cvar"] = alloc.empirical_cvar;
                j["cvar_constraint_active"] = alloc.cvar_constraint_active;
                j["iterations"] = alloc.iterations;
                break;
            }
            case cvar::SolveStatus::Infeasible: {
                j["status"] = "infeasible";
                j["min_feasible_lambda"] = alloc.min_feasible_lambda;
                json weights = json::object();
                for (Eigen::Index i = 0; i < alloc.min_cvar_x.size(); ++i)
                    weights[scen.table.tickers[static_cast<size_t>(i)]] = alloc.min_cvar_x(i);
                j["min_cvar_weights"] = weights;
                break;
            }
            case cvar::SolveStatus::NotConverged: {
                j["status"] = "not_converged";
                j["iterations"] = alloc.iterations;
                break;
            }
        }
        results.push_back(std::move(j));
        std::printf("optimize: alpha=%.3f lambda=%.4f -> %s\n", alpha, lambda,
                    results.back().at("status").get<std::string>().c_str());
    }
    json out{{"_meta", meta(cfg)}, {"allocations", results}};
    if (!out_file.empty()) write_json(out_file, out);
    else std::printf("%s\n", out.dump(1).c_str());
    return 0;
}

int cmd_backtest(const CommonOpts& common, const std::string& prices, const std::string& yields) {
    RunConfig cfg = load_config(common);
    auto [price_table, feature_table] = market::load_market_csv(
        prices.empty() ? cfg.prices_path : prices, yields.empty() ? cfg.yields_path : yields, cfg.ingest,
        nullptr);
    auto result = backtest::run_backtest(price_table, feature_table, cfg.backtest, cfg.strategies());
    fs::path dir = fs::path(cfg.output_dir) / "backtest";
    backtest::write_backtest_outputs(result, dir.string(), meta(cfg));
    std::printf("backtest: %zu rebalances x %zu strategies x %zu levels x %d runs -> %s\n",
                result.rebalance_dates.size(), result.strategies.size(), result.cvar_grid.size(),
                result.runs, dir.string().c_str());
    return 0;
}

int cmd_report(const CommonOpts& common, const std::string& backtest_dir) {
    RunConfig cfg = load_config(common);
    std::string dir = backtest_dir.empty() ? (fs::path(cfg.output_dir) / "backtest").string() : backtest_dir;
    std::string text = write_report(dir, cfg.output_dir, meta(cfg));
    std::printf("%s", text.c_str());
    std::printf("report -> %s\n", cfg.output_dir.c_str());
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"scenalloc: regime-aware synthetic scenarios and CVaR-constrained allocation"};
    app.require_subcommand(1);

    CommonOpts common;
    uint64_t seed_arg = 0;
    int jobs_arg = 0, epochs_arg = 0;
    app.add_option("--config", common.config_path, "TOML run configuration (env SCENALLOC_CONFIG)");
    app.add_option("--out", common.out, "output directory/file override");
    auto* seed_opt = app.add_option("--seed", seed_arg, "seed override");
    auto* jobs_opt = app.add_option("--jobs", jobs_arg, "worker threads for the backtest grid");
    auto* epochs_opt = app.add_option("--epochs", epochs_arg, "adversarial training epochs override");

    // fixture
    std::string preset;
    auto* fixture_cmd = app.add_subcommand("fixture", "generate deterministic market-data CSVs");
    fixture_cmd->add_option("--preset", preset, "two-regime | dominant-asset");

    // ingest
    std::string prices, yields;
    auto* ingest_cmd = app.add_subcommand("ingest", "load price/yield CSVs and emit scenario table");
    ingest_cmd->add_option("--prices", prices, "prices.csv path");
    ingest_cmd->add_option("--yields", yields, "yields.csv path");

    // sdg train/generate
    auto* sdg_cmd = app.add_subcommand("sdg", "synthetic data generator");
    sdg_cmd->require_subcommand(1);
    std::string window_start, window_end, model_out = "model.json", model_path, gen_out = "synthetic.csv";
    int gen_count = 500;
    auto* train_cmd = sdg_cmd->add_subcommand("train", "train the generator on a scenario history");
    train_cmd->add_option("--prices", prices, "prices.csv path");
    train_cmd->add_option("--yields", yields, "yields.csv path");
    train_cmd->add_option("--window-start", window_start, "first anchor date (YYYY-MM-DD)");
    train_cmd->add_option("--window-end", window_end, "last anchor date");
    train_cmd->add_option("--model", model_out, "output model file");
    auto* gen_cmd = sdg_cmd->add_subcommand("generate", "sample synthetic scenarios from a model");
    gen_cmd->add_option("--model", model_path, "trained model file")->required();
    gen_cmd->add_option("--count", gen_count, "number of samples");
    gen_cmd->add_option("--out-file", gen_out, "output scenario CSV");

    // validate
    std::string original_path, synthetic_path;
    auto* validate_cmd = app.add_subcommand("validate", "compare original and synthetic scenarios");
    validate_cmd->add_option("--original", original_path, "original scenario CSV")->required();
    validate_cmd->add_option("--synthetic", synthetic_path, "synthetic scenario CSV")->required();

    // optimize
    std::string scen_path, feat_path, today_arg, today_csv, alloc_out;
    double alpha = 0.0;
    std::vector<double> lambdas;
    auto* optimize_cmd = app.add_subcommand("optimize", "solve the CVaR-constrained allocation");
    optimize_cmd->add_option("--scenarios", scen_path, "scenario CSV (returns, optional features)")
        ->required();
    optimize_cmd->add_option("--features", feat_path, "separate sample-features CSV");
    optimize_cmd->add_option("--today", today_arg, "present-day features, comma separated");
    optimize_cmd->add_option("--today-csv", today_csv, "present-day features as a one-row CSV");
    optimize_cmd->add_option("--alpha", alpha, "CVaR confidence");
    optimize_cmd->add_option("--lambda", lambdas, "risk budget (repeatable)");
    optimize_cmd->add_option("--out-file", alloc_out, "allocation JSON path");

    // backtest, report
    auto* backtest_cmd = app.add_subcommand("backtest", "run the rolling-window strategy comparison");
    backtest_cmd->add_option("--prices", prices, "prices.csv path");
    backtest_cmd->add_option("--yields", yields, "yields.csv path");
    std::string backtest_dir;
    auto* report_cmd = app.add_subcommand("report", "summarize backtest outputs into metric tables");
    report_cmd->add_option("--backtest-dir", backtest_dir, "backtest output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (seed_opt->count()) common.seed = seed_arg;
    if (jobs_opt->count()) common.jobs = jobs_arg;
    if (epochs_opt->count()) common.epochs = epochs_arg;

    try {
        if (fixture_cmd->parsed()) return cmd_fixture(common, preset);
        if (ingest_cmd->parsed()) return cmd_ingest(common, prices, yields);
        if (sdg_cmd->parsed() && train_cmd->parsed())
            return cmd_sdg_train(common, prices, yields, window_start, window_end, model_out);
        if (sdg_cmd->parsed() && gen_cmd->parsed())
            return cmd_sdg_generate(common, model_path, gen_count, gen_out);
        if (validate_cmd->parsed()) return cmd_validate(common, original_path, synthetic_path);
        if (optimize_cmd->parsed())
            return cmd_optimize(common, scen_path, feat_path, today_arg, today_csv, alpha, lambdas,
                                alloc_out);
        if (backtest_cmd->parsed()) return cmd_backtest(common, prices, yields);
        if (report_cmd->parsed()) return cmd_report(common, backtest_dir);
        std::fprintf(stderr, "%s", app.help().c_str());
        return 2;
    } catch (const Error& e) {
        json err{{"error", error_kind_name(e.kind())}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
}

}  // namespace scenalloc::cli

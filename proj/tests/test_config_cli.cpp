#include <doctest.h>

#include <filesystem>

#include "scenalloc/cli.hpp"
#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"
#include "scenalloc/run_config.hpp"
#include "scenalloc/toml.hpp"

using namespace scenalloc;
using namespace scenalloc::cli;

namespace {

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"scenalloc"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "scenalloc_test_cli" / name;
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("toml parser covers the config subset") {
    auto doc = parse_toml(R"(
# top comment
seed = 42
output_dir = "out"   # trailing comment
ratio = 1.5e-2
flag = true
date = 2008-01-02
list = [1, 2, 3]
nested = [[0.9, 0.1], [0.2, 0.8]]

[data]
prices = "p.csv"

[backtest]
cvar_grid = [
  0.075,
  0.10,
]

[[fixture.regimes]]
mean_annual = [0.1, 0.2]
correlation = 0.3

[[fixture.regimes]]
mean_annual = [-0.1, -0.2]
)");
    CHECK(doc.at("seed").get<int>() == 42);
    CHECK(doc.at("output_dir").get<std::string>() == "out");
    CHECK(doc.at("ratio").get<double>() == doctest::Approx(0.015));
    CHECK(doc.at("flag").get<bool>() == true);
    CHECK(doc.at("date").get<std::string>() == "2008-01-02");
    CHECK(doc.at("list").size() == 3);
    CHECK(doc.at("nested")[1][1].get<double>() == doctest::Approx(0.8));
    CHECK(doc.at("data").at("prices").get<std::string>() == "p.csv");
    CHECK(doc.at("backtest").at("cvar_grid").size() == 2);
    REQUIRE(doc.at("fixture").at("regimes").size() == 2);
    CHECK(doc.at("fixture").at("regimes")[0].at("correlation").get<double>() == doctest::Approx(0.3));

    CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), Error);
    CHECK_THROWS_AS(parse_toml("a = [1, 2\n"), Error);
    CHECK_THROWS_AS(parse_toml("a = what\n"), Error);
}

TEST_CASE("run config: defaults, file values, hash stability") {
    auto dir = temp_dir("config");
    auto path = (dir / "run.toml").string();
    write_text_file(path, R"(
seed = 7
output_dir = "outdir"

[data]
prices = "p.csv"
yields = "y.csv"

[ingest]
horizon_days = 60

[ctgan]
epochs = 25
batch_size = 120
pac_size = 10

[backtest]
lookback_years = 2
cvar_grid = [0.1, 0.2]
runs_per_level = 2
spreads_bp = [0.5, 1.0, 2.0, 3.0]
strategies = ["Hw/oF", "EW"]
)");
    auto cfg = RunConfig::from_toml_file(path);
    CHECK(cfg.seed == 7);
    CHECK(cfg.prices_path == "p.csv");
    CHECK(cfg.ingest.horizon_days == 60);
    CHECK(cfg.backtest.horizon_days == 60);
    CHECK(cfg.backtest.ctgan.epochs == 25);
    CHECK(cfg.backtest.cvar_grid.size() == 2);
    CHECK(cfg.strategies().size() == 2);
    CHECK(cfg.strategies()[0].kind == backtest::StrategyKind::HwoF);

    // Hash is stable across loads and changes when content changes.
    auto again = RunConfig::from_toml_file(path);
    CHECK(cfg.config_hash() == again.config_hash());
    write_text_file(path, "seed = 8\n");
    CHECK(RunConfig::from_toml_file(path).config_hash() != cfg.config_hash());

    // Defaults cover the standard risk-budget grid.
    RunConfig fresh;
    CHECK(fresh.backtest.cvar_grid.size() == 10);
    CHECK(fresh.backtest.cvar_grid.front() == doctest::Approx(0.075));
    CHECK(fresh.backtest.cvar_grid.back() == doctest::Approx(0.30));
    CHECK(fresh.strategy_names.size() == 5);
}

TEST_CASE("cli end-to-end: fixture -> ingest -> optimize -> validate") {
    auto dir = temp_dir("e2e");
    auto fix_dir = (dir / "fix").string();
    auto cfg_path = (dir / "run.toml").string();
    write_text_file(cfg_path, "seed = 3\n[fixture]\npreset = \"dominant-asset\"\nstart = 2003-01-01\nend = 2004-06-30\n");

    CHECK(run_cli({"--config", cfg_path, "--out", fix_dir, "fixture"}) == 0);
    CHECK(std::filesystem::exists(fix_dir + "/prices.csv"));
    CHECK(std::filesystem::exists(fix_dir + "/regimes.csv"));

    // Determinism: rerunning writes byte-identical prices.
    auto before = read_text_file(fix_dir + "/prices.csv");
    CHECK(run_cli({"--config", cfg_path, "--out", fix_dir, "fixture"}) == 0);
    CHECK(read_text_file(fix_dir + "/prices.csv") == before);

    auto ingest_dir = (dir / "ingest").string();
    write_text_file(cfg_path, "seed = 3\n[ingest]\nhorizon_days = 60\n");
    CHECK(run_cli({"--config", cfg_path, "--out", ingest_dir, "ingest", "--prices",
                   fix_dir + "/prices.csv", "--yields", fix_dir + "/yields.csv"}) == 0);
    CHECK(std::filesystem::exists(ingest_dir + "/scenarios.csv"));
    auto scen_csv = read_csv(ingest_dir + "/scenarios.csv");
    CHECK(scen_csv.comments.size() == 1);
    CHECK(scen_csv.comments[0].find("config_hash=") != std::string::npos);

    auto alloc_path = (dir / "alloc.json").string();
    CHECK(run_cli({"optimize", "--scenarios", ingest_dir + "/scenarios.csv", "--alpha", "0.9",
                   "--lambda", "0.15", "--lambda", "0.30", "--out-file", alloc_path}) == 0);
    auto alloc = nlohmann::json::parse(read_text_file(alloc_path));
    REQUIRE(alloc.at("allocations").size() == 2);
    CHECK(alloc.at("allocations")[0].at("status").get<std::string>() == "optimal");
    // The dominant asset takes everything.
    CHECK(alloc.at("allocations")[0].at("weights").at("A00").get<double>() == doctest::Approx(1.0).epsilon(1e-6));

    // Feature-weighted variant via the features embedded in the scenario CSV.
    CHECK(run_cli({"optimize", "--scenarios", ingest_dir + "/scenarios.csv", "--alpha", "0.9",
                   "--lambda", "0.2", "--today", "0.03,0.035", "--out-file", alloc_path}) == 0);
    auto walloc = nlohmann::json::parse(read_text_file(alloc_path));
    CHECK(walloc.at("allocations")[0].at("feature_weighted").get<bool>());

    // validate: original against itself is a perfect score.
    auto val_dir = (dir / "val").string();
    CHECK(run_cli({"--out", val_dir, "validate", "--original", ingest_dir + "/scenarios.csv",
                   "--synthetic", ingest_dir + "/scenarios.csv"}) == 0);
    auto report = nlohmann::json::parse(read_text_file(val_dir + "/report.json"));
    CHECK(report.at("mean_ks").get<double>() == doctest::Approx(1.0));
    CHECK(report.at("min_corr_similarity").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli error paths") {
    CHECK(run_cli({"definitely-not-a-command"}) == 2);
    CHECK(run_cli({"optimize"}) == 2);  // missing required --scenarios
    CHECK(run_cli({"optimize", "--scenarios", "/nonexistent/file.csv"}) == 1);
    CHECK(run_cli({"report", "--backtest-dir", "/nonexistent/dir"}) == 1);
}

TEST_CASE("cli backtest + report on a small historical-only grid") {
    auto dir = temp_dir("bt");
    auto fix_dir = (dir / "fix").string();
    auto cfg_path = (dir / "run.toml").string();
    write_text_file(cfg_path,
                    "seed = 5\n"
                    "[fixture]\npreset = \"dominant-asset\"\nstart = 2003-01-01\nend = 2008-06-30\n");
    REQUIRE(run_cli({"--config", cfg_path, "--out", fix_dir, "fixture"}) == 0);

    write_text_file(cfg_path, strfmt(R"(
seed = 5
output_dir = "%s"

[data]
prices = "%s/prices.csv"
yields = "%s/yields.csv"

[ingest]
horizon_days = 60

[backtest]
lookback_years = 2
cvar_grid = [0.1, 0.2]
runs_per_level = 2
alpha = 0.9
spreads_bp = [0.5, 1.0, 2.0, 3.0]
min_window_scenarios = 150
strategies = ["Hw/oF", "HwF", "EW"]
)",
                                     (dir / "out").string().c_str(), fix_dir.c_str(), fix_dir.c_str()));

    REQUIRE(run_cli({"--config", cfg_path, "backtest"}) == 0);
    auto out_dir = (dir / "out").string();
    REQUIRE(std::filesystem::exists(out_dir + "/backtest/summary.json"));
    REQUIRE(std::filesystem::exists(out_dir + "/backtest/results.csv"));

    // Determinism criterion at the artifact level: byte-identical CSVs.
    auto first = read_text_file(out_dir + "/backtest/results.csv");
    REQUIRE(run_cli({"--config", cfg_path, "backtest"}) == 0);
    CHECK(read_text_file(out_dir + "/backtest/results.csv") == first);

    REQUIRE(run_cli({"--config", cfg_path, "report"}) == 0);
    CHECK(std::filesystem::exists(out_dir + "/annualized_return.csv"));
    CHECK(std::filesystem::exists(out_dir + "/net_return.csv"));

    // EW column identical across lambda rows; net = gross - expense.
    auto summary = nlohmann::json::parse(read_text_file(out_dir + "/backtest/summary.json"));
    const auto& returns = summary.at("tables").at("annualized_return");
    const auto& net = summary.at("tables").at("net_return");
    const auto& expense = summary.at("tables").at("expense_bp");
    double ew0 = returns[0].at("EW").at("mean").get<double>();
    for (size_t l = 0; l < returns.size(); ++l) {
        CHECK(returns[l].at("EW").at("mean").get<double>() == doctest::Approx(ew0));
        for (const char* strat : {"Hw/oF", "HwF", "EW"}) {
            double g = returns[l].at(strat).at("mean").get<double>();
            double e = expense[l].at(strat).at("mean").get<double>();
            double n = net[l].at(strat).at("mean").get<double>();
            CHECK(n == doctest::Approx(g - e * 1e-4).epsilon(1e-12));
        }
    }
}

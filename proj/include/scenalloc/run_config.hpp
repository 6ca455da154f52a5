#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scenalloc/backtest.hpp"
#include "scenalloc/fixture.hpp"

namespace scenalloc::cli {

// Resolved configuration for a whole run: TOML file merged with CLI
// overrides. Every output artifact embeds config_hash() and the seed.
struct RunConfig {
    std::string prices_path;
    std::string yields_path;
    market::IngestConfig ingest;
    cvar::RiskSpec risk;
    backtest::BacktestConfig backtest;
    std::vector<std::string> strategy_names = {"Gw/oF", "GwF", "Hw/oF", "HwF", "EW"};
    int scenario_count = 500;
    std::string output_dir = "out";
    uint64_t seed = 0;

    // Fixture section (used by the `fixture` subcommand).
    std::string fixture_preset = "two-regime";
    Date fixture_start{2003, 1, 1};
    Date fixture_end{2012, 6, 30};
    nlohmann::json fixture_overrides;  // raw [fixture] table, may define regimes

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig from_toml_file(const std::string& path);

    nlohmann::json to_json() const;  // canonical resolved form
    uint64_t config_hash() const;
    std::string meta_comment() const;  // "# scenalloc config_hash=... seed=..."
    std::vector<backtest::StrategySpec> strategies() const;
    fixture::FixtureSpec fixture_spec() const;
};

uint64_t fnv1a64(const std::string& data);

}  // namespace scenalloc::cli

#include "scenalloc/run_config.hpp"

#include "scenalloc/errors.hpp"
#include "scenalloc/toml.hpp"

namespace scenalloc::cli {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_date(const json& j, const char* key, Date& out) {
    if (j.contains(key)) out = parse_date(j.at(key).get<std::string>());
}

}  // namespace

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    try {
        maybe(doc, "seed", cfg.seed);
        maybe(doc, "output_dir", cfg.output_dir);
        maybe(doc, "scenario_count", cfg.scenario_count);

        if (doc.contains("data")) {
            const auto& d = doc.at("data");
            maybe(d, "prices", cfg.prices_path);
            maybe(d, "yields", cfg.yields_path);
        }
        if (doc.contains("ingest")) {
            const auto& d = doc.at("ingest");
            maybe(d, "horizon_days", cfg.ingest.horizon_days);
            maybe(d, "date_format", cfg.ingest.date_format);
        }
        if (doc.contains("risk")) {
            const auto& d = doc.at("risk");
            maybe(d, "alpha", cfg.risk.alpha);
            maybe(d, "lambda", cfg.risk.lambda);
        }
        if (doc.contains("ctgan")) {
            const auto& d = doc.at("ctgan");
            auto& c = cfg.backtest.ctgan;
            maybe(d, "embedding_dim", c.embedding_dim);
            maybe(d, "generator_dims", c.generator_dims);
            maybe(d, "discriminator_dims", c.discriminator_dims);
            maybe(d, "pac_size", c.pac_size);
            maybe(d, "learning_rate", c.learning_rate);
            maybe(d, "epochs", c.epochs);
            maybe(d, "batch_size", c.batch_size);
            maybe(d, "gumbel_tau", c.gumbel_tau);
            maybe(d, "gp_weight", c.gp_weight);
            maybe(d, "vgm_max_modes", c.vgm_max_modes);
            maybe(d, "vgm_prune_weight", c.vgm_prune_weight);
            maybe(d, "tsne_perplexity", c.tsne_perplexity);
            maybe(d, "tsne_iterations", c.tsne_iterations);
            maybe(d, "hdbscan_min_cluster_size", c.hdbscan_min_cluster_size);
        }
        if (doc.contains("backtest")) {
            const auto& d = doc.at("backtest");
            auto& b = cfg.backtest;
            maybe(d, "lookback_years", b.lookback_years);
            maybe(d, "rebalance_month", b.rebalance_month);
            maybe(d, "cvar_grid", b.cvar_grid);
            maybe(d, "runs_per_level", b.runs_per_level);
            maybe(d, "alpha", b.alpha);
            maybe(d, "spreads_bp", b.spreads_bp);
            maybe(d, "min_window_scenarios", b.min_window_scenarios);
            maybe(d, "jobs", b.jobs);
            maybe(d, "strategies", cfg.strategy_names);
        }
        if (doc.contains("fixture")) {
            const auto& d = doc.at("fixture");
            maybe(d, "preset", cfg.fixture_preset);
            maybe_date(d, "start", cfg.fixture_start);
            maybe_date(d, "end", cfg.fixture_end);
            cfg.fixture_overrides = d;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, strfmt("config: %s", e.what()));
    }
    cfg.backtest.horizon_days = cfg.ingest.horizon_days;
    cfg.backtest.seed = cfg.seed;
    cfg.backtest.ctgan.seed = cfg.seed;
    return cfg;
}

RunConfig RunConfig::from_toml_file(const std::string& path) {
    return from_json(parse_toml_file(path));
}

json RunConfig::to_json() const {
    // Canonical semantic form. The output directory is not hashed: rerunning
    // the same configuration into a different directory is the same run.
    json j;
    j["seed"] = seed;
    j["scenario_count"] = scenario_count;
    j["data"] = {{"prices", prices_path}, {"yields", yields_path}};
    j["ingest"] = {{"horizon_days", ingest.horizon_days}, {"date_format", ingest.date_format}};
    j["risk"] = {{"alpha", risk.alpha}, {"lambda", risk.lambda}};
    const auto& c = backtest.ctgan;
    j["ctgan"] = {{"embedding_dim", c.embedding_dim},
                  {"generator_dims", c.generator_dims},
                  {"discriminator_dims", c.discriminator_dims},
                  {"pac_size", c.pac_size},
                  {"learning_rate", c.learning_rate},
                  {"epochs", c.epochs},
                  {"batch_size", c.batch_size},
                  {"gumbel_tau", c.gumbel_tau},
                  {"gp_weight", c.gp_weight},
                  {"vgm_max_modes", c.vgm_max_modes},
                  {"vgm_prune_weight", c.vgm_prune_weight},
                  {"tsne_perplexity", c.tsne_perplexity},
                  {"tsne_iterations", c.tsne_iterations},
                  {"hdbscan_min_cluster_size", c.hdbscan_min_cluster_size}};
    j["backtest"] = {{"lookback_years", backtest.lookback_years},
                     {"rebalance_month", backtest.rebalance_month},
                     {"cvar_grid", backtest.cvar_grid},
                     {"runs_per_level", backtest.runs_per_level},
                     {"alpha", backtest.alpha},
                     {"spreads_bp", backtest.spreads_bp},
                     {"min_window_scenarios", backtest.min_window_scenarios},
                     {"jobs", backtest.jobs},
                     {"strategies", strategy_names}};
    j["fixture"] = {{"preset", fixture_preset},
                    {"start", format_date(fixture_start)},
                    {"end", format_date(fixture_end)}};
    if (!fixture_overrides.is_null()) j["fixture"]["overrides"] = fixture_overrides;
    return j;
}

uint64_t RunConfig::config_hash() const { return fnv1a64(to_json().dump()); }

std::string RunConfig::meta_comment() const {
    return strfmt("# scenalloc config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash()),
                  static_cast<unsigned long long>(seed));
}

std::vector<backtest::StrategySpec> RunConfig::strategies() const {
    std::vector<backtest::StrategySpec> out;
    for (const auto& name : strategy_names)
        out.push_back({backtest::strategy_from_name(name), scenario_count});
    if (out.empty()) throw Error(ErrorKind::Config, "no strategies configured");
    return out;
}

fixture::FixtureSpec RunConfig::fixture_spec() const {
    fixture::FixtureSpec spec = fixture::spec_by_name(fixture_preset, seed);
    spec.start = fixture_start;
    spec.end = fixture_end;
    const auto& o = fixture_overrides;
    if (o.is_object()) {
        try {
            if (o.contains("n_assets") || o.contains("regimes")) {
                // A fully specified fixture replaces the preset regimes.
                fixture::FixtureSpec custom;
                custom.seed = seed;
                custom.start = spec.start;
                custom.end = spec.end;
                custom.n_assets = o.value("n_assets", spec.n_assets);
                custom.n_tenors = o.value("n_tenors", spec.n_tenors);
                maybe(o, "yield_mean_reversion", custom.yield_mean_reversion);
                maybe(o, "yield_vol", custom.yield_vol);
                if (o.contains("regimes")) {
                    for (const auto& rj : o.at("regimes")) {
                        fixture::RegimeSpec r;
                        auto means = rj.at("mean_annual").get<std::vector<double>>();
                        auto vols = rj.at("vol_annual").get<std::vector<double>>();
                        r.mean_annual = Eigen::Map<Eigen::VectorXd>(means.data(),
                                                                    static_cast<Eigen::Index>(means.size()));
                        r.vol_annual = Eigen::Map<Eigen::VectorXd>(vols.data(),
                                                                   static_cast<Eigen::Index>(vols.size()));
                        r.correlation = rj.value("correlation", 0.0);
                        r.yield_level = rj.value("yield_level", 0.02);
                        custom.regimes.push_back(std::move(r));
                    }
                    auto k = static_cast<Eigen::Index>(custom.regimes.size());
                    custom.switch_prob = Eigen::MatrixXd::Zero(k, k);
                    if (o.contains("switch_prob")) {
                        auto rows = o.at("switch_prob").get<std::vector<std::vector<double>>>();
                        for (Eigen::Index i = 0; i < k; ++i)
                            for (Eigen::Index jj = 0; jj < k; ++jj)
                                custom.switch_prob(i, jj) = rows[static_cast<size_t>(i)][static_cast<size_t>(jj)];
                    } else {
                        custom.switch_prob.setConstant(1.0 / static_cast<double>(k));
                    }
                } else {
                    custom.regimes = spec.regimes;
                    custom.switch_prob = spec.switch_prob;
                }
                return custom;
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, strfmt("fixture config: %s", e.what()));
        }
    }
    return spec;
}

}  // namespace scenalloc::cli

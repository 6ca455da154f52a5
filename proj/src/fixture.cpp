#include "scenalloc/fixture.hpp"

#include <cmath>
#include <filesystem>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::fixture {

namespace {

// Tenor ladder in years; a fixture with l tenors takes the first l.
const double kTenorYears[] = {0.25, 2.0, 10.0, 0.5, 1.0, 5.0, 30.0, 0.0833};
const char* kTenorNames[] = {"3M", "2Y", "10Y", "6M", "1Y", "5Y", "30Y", "1M"};

// Nelson-Siegel loadings with lambda = 0.5.
void ns_loadings(double tenor_years, double& slope_load, double& curve_load) {
    const double lambda = 0.5;
    double lt = lambda * tenor_years;
    double decay = (1.0 - std::exp(-lt)) / lt;
    slope_load = decay;
    curve_load = decay - std::exp(-lt);
}

// PSD square root of the equicorrelation covariance; tolerates zero vols.
Eigen::MatrixXd cholesky_equicorr(const Eigen::VectorXd& vols, double rho) {
    const Eigen::Index n = vols.size();
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, rho);
    corr.diagonal().setOnes();
    Eigen::MatrixXd cov = vols.asDiagonal() * corr * vols.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Parameter, "regime covariance decomposition failed");
    if (solver.eigenvalues().minCoeff() < -1e-12)
        throw Error(ErrorKind::Parameter, "regime covariance is not positive semidefinite");
    return solver.eigenvectors() *
           solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           solver.eigenvectors().transpose();
}

bool is_weekday(const Date& d) {
    // 1970-01-01 was a Thursday (weekday 4 with Monday = 0).
    int wd = ((d.serial() % 7) + 7 + 3) % 7;
    return wd < 5;
}

}  // namespace

void FixtureSpec::validate() const {
    if (n_assets < 1 || n_assets > 64) throw Error(ErrorKind::Parameter, "n_assets out of range");
    if (n_tenors < 1 || n_tenors > 8) throw Error(ErrorKind::Parameter, "n_tenors out of range (max 8)");
    if (regimes.empty()) throw Error(ErrorKind::Parameter, "need at least one regime");
    const auto k = static_cast<Eigen::Index>(regimes.size());
    if (switch_prob.rows() != k || switch_prob.cols() != k)
        throw Error(ErrorKind::Parameter, "switching matrix shape must be k x k");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(switch_prob.row(i).sum() - 1.0) > 1e-9)
            throw Error(ErrorKind::Parameter, "switching matrix rows must sum to 1");
        if ((switch_prob.row(i).array() < 0).any())
            throw Error(ErrorKind::Parameter, "switching probabilities must be nonnegative");
    }
    for (const auto& r : regimes) {
        if (r.mean_annual.size() != n_assets || r.vol_annual.size() != n_assets)
            throw Error(ErrorKind::Parameter, "regime mean/vol length must equal n_assets");
        if ((r.vol_annual.array() < 0).any()) throw Error(ErrorKind::Parameter, "negative vol");
        if (r.correlation <= -1.0 / (n_assets > 1 ? n_assets - 1.0 : 1.0) || r.correlation >= 1.0)
            throw Error(ErrorKind::Parameter, "equicorrelation out of the PSD range");
    }
    if (!(start < end)) throw Error(ErrorKind::Parameter, "fixture start must precede end");
}

FixtureResult generate_fixture(const FixtureSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 0xf1c7));

    std::vector<Date> days;
    for (int s = spec.start.serial(); s <= spec.end.serial(); ++s) {
        Date d = date_from_serial(s);
        if (is_weekday(d)) days.push_back(d);
    }
    const auto T = static_cast<Eigen::Index>(days.size());
    const int n = spec.n_assets;
    const int l = spec.n_tenors;
    const auto k = static_cast<int>(spec.regimes.size());

    std::vector<Eigen::MatrixXd> chol;
    for (const auto& r : spec.regimes) chol.push_back(cholesky_equicorr(r.vol_annual / std::sqrt(252.0), r.correlation));

    FixtureResult out;
    out.prices.dates = days;
    out.features.dates = days;
    for (int i = 0; i < n; ++i) out.prices.tickers.push_back(strfmt("A%02d", i));
    for (int i = 0; i < l; ++i) out.features.tenors.push_back(kTenorNames[i]);
    out.prices.prices.resize(n, T);
    out.features.yields.resize(l, T);
    out.regime_by_day.resize(static_cast<size_t>(T));

    int regime = 0;
    double level = spec.regimes[0].yield_level;
    double slope = 0.01;
    double curve = 0.0;
    Eigen::VectorXd price = Eigen::VectorXd::Constant(n, 100.0);
    Eigen::VectorXd eps(n);

    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            double u = rng.uniform();
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
                acc += spec.switch_prob(regime, j);
                if (u < acc) {
                    regime = j;
                    break;
                }
            }
        }
        out.regime_by_day[static_cast<size_t>(t)] = regime;
        const auto& rs = spec.regimes[static_cast<size_t>(regime)];

        for (int i = 0; i < n; ++i) eps(i) = rng.normal();
        Eigen::VectorXd ret = rs.mean_annual / 252.0 + chol[static_cast<size_t>(regime)] * eps;
        price = price.cwiseProduct(Eigen::VectorXd::Ones(n) + ret);
        out.prices.prices.col(t) = price;

        level += spec.yield_mean_reversion * (rs.yield_level - level) + spec.yield_vol * rng.normal();
        slope += spec.yield_mean_reversion * (0.01 - slope) + spec.yield_vol * rng.normal();
        curve += spec.yield_mean_reversion * (0.0 - curve) + 0.5 * spec.yield_vol * rng.normal();
        for (int i = 0; i < l; ++i) {
            double sl, cl;
            ns_loadings(kTenorYears[i], sl, cl);
            out.features.yields(i, t) = level + slope * sl + curve * cl;
        }
    }
    if (!out.prices.prices.allFinite() || (out.prices.prices.array() <= 0).any())
        throw Error(ErrorKind::Numeric, "fixture produced non-positive prices");
    return out;
}

void write_fixture_csv(const FixtureResult& result, const std::string& out_dir,
                       const std::vector<std::string>& comments) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto T = result.prices.n_dates();

    std::vector<std::vector<std::string>> prices_rows, yields_rows, regime_rows;
    for (Eigen::Index t = 0; t < T; ++t) {
        std::vector<std::string> pr{format_date(result.prices.dates[static_cast<size_t>(t)])};
        for (Eigen::Index i = 0; i < result.prices.n_assets(); ++i)
            pr.push_back(fmt_double(result.prices.prices(i, t)));
        prices_rows.push_back(std::move(pr));

        std::vector<std::string> yr{format_date(result.features.dates[static_cast<size_t>(t)])};
        for (Eigen::Index i = 0; i < result.features.n_features(); ++i)
            yr.push_back(fmt_double(result.features.yields(i, t)));
        yields_rows.push_back(std::move(yr));

        regime_rows.push_back({format_date(result.prices.dates[static_cast<size_t>(t)]),
                               std::to_string(result.regime_by_day[static_cast<size_t>(t)])});
    }

    std::vector<std::string> pheader{"date"};
    for (const auto& t : result.prices.tickers) pheader.push_back(t);
    write_csv((fs::path(out_dir) / "prices.csv").string(), comments, pheader, prices_rows);

    std::vector<std::string> yheader{"date"};
    for (const auto& t : result.features.tenors) yheader.push_back(t);
    write_csv((fs::path(out_dir) / "yields.csv").string(), comments, yheader, yields_rows);

    write_csv((fs::path(out_dir) / "regimes.csv").string(), comments, {"date", "regime"}, regime_rows);
}

FixtureSpec two_regime_spec(uint64_t seed) {
    FixtureSpec spec;
    spec.seed = seed;
    spec.n_assets = 4;
    spec.n_tenors = 2;
    RegimeSpec calm;
    calm.mean_annual = (Eigen::VectorXd(4) << 0.10, 0.08, 0.06, 0.04).finished();
    calm.vol_annual = (Eigen::VectorXd(4) << 0.10, 0.12, 0.08, 0.05).finished();
    calm.correlation = 0.3;
    calm.yield_level = 0.045;
    RegimeSpec stressed;
    stressed.mean_annual = (Eigen::VectorXd(4) << -0.15, -0.12, -0.08, 0.02).finished();
    stressed.vol_annual = (Eigen::VectorXd(4) << 0.25, 0.30, 0.20, 0.06).finished();
    stressed.correlation = 0.6;
    stressed.yield_level = 0.010;
    spec.regimes = {calm, stressed};
    // Long dwell times so annual-horizon scenarios stay regime-pure.
    spec.switch_prob.resize(2, 2);
    spec.switch_prob << 1.0 - 1.0 / 756.0, 1.0 / 756.0, 1.0 / 504.0, 1.0 - 1.0 / 504.0;
    return spec;
}

FixtureSpec dominant_asset_spec(uint64_t seed) {
    FixtureSpec spec;
    spec.seed = seed;
    spec.n_assets = 4;
    spec.n_tenors = 2;
    RegimeSpec a, b;
    // Asset 0 dominates outright: its annual-return support sits above the
    // other assets' supports in both regimes, so any scenario weighting puts
    // the optimum on it.
    a.mean_annual = (Eigen::VectorXd(4) << 0.20, -0.12, -0.14, -0.16).finished();
    a.vol_annual = (Eigen::VectorXd(4) << 0.020, 0.045, 0.050, 0.055).finished();
    a.correlation = 0.25;
    a.yield_level = 0.04;
    b.mean_annual = (Eigen::VectorXd(4) << 0.18, -0.14, -0.12, -0.18).finished();
    b.vol_annual = (Eigen::VectorXd(4) << 0.025, 0.050, 0.045, 0.060).finished();
    b.correlation = 0.4;
    b.yield_level = 0.015;
    spec.regimes = {a, b};
    spec.switch_prob.resize(2, 2);
    spec.switch_prob << 1.0 - 1.0 / 504.0, 1.0 / 504.0, 1.0 / 504.0, 1.0 - 1.0 / 504.0;
    return spec;
}

FixtureSpec spec_by_name(const std::string& name, uint64_t seed) {
    if (name == "two-regime") return two_regime_spec(seed);
    if (name == "dominant-asset") return dominant_asset_spec(seed);
    throw Error(ErrorKind::Parameter, strfmt("unknown fixture preset '%s'", name.c_str()));
}

std::pair<market::ScenarioTable, std::vector<int>> two_regime_scenarios(int per_regime,
                                                                        uint64_t seed) {
    Rng rng(derive_seed(seed, 0x2247));
    const int n = 4, l = 2;
    market::ScenarioTable t;
    t.horizon_days = 252;
    for (int i = 0; i < n; ++i) t.tickers.push_back(strfmt("A%02d", i));
    t.tenors = {"3M", "2Y"};
    const int m = 2 * per_regime;
    t.R.resize(n, m);
    t.F.resize(l, m);
    std::vector<int> labels(static_cast<size_t>(m));

    Eigen::VectorXd mean0 = (Eigen::VectorXd(4) << 0.10, 0.08, 0.06, 0.04).finished();
    Eigen::VectorXd mean1 = (Eigen::VectorXd(4) << -0.12, -0.10, -0.06, 0.02).finished();
    Eigen::VectorXd vol0 = (Eigen::VectorXd(4) << 0.03, 0.04, 0.03, 0.02).finished();
    Eigen::VectorXd vol1 = (Eigen::VectorXd(4) << 0.05, 0.06, 0.04, 0.02).finished();
    Eigen::MatrixXd c0 = cholesky_equicorr(vol0, 0.3);
    Eigen::MatrixXd c1 = cholesky_equicorr(vol1, 0.5);
    const double ylevel0 = 0.045, ylevel1 = 0.012, yvol = 0.0015;

    for (int j = 0; j < m; ++j) {
        int regime = j % 2;  // interleaved so any slice is balanced
        labels[static_cast<size_t>(j)] = regime;
        Eigen::VectorXd eps(n);
        for (int i = 0; i < n; ++i) eps(i) = rng.normal();
        t.R.col(j) = (regime == 0 ? mean0 + c0 * eps : mean1 + c1 * eps);
        double base = (regime == 0 ? ylevel0 : ylevel1) + yvol * rng.normal();
        t.F(0, j) = base;
        t.F(1, j) = base + 0.008 + 0.5 * yvol * rng.normal();
    }
    for (int j = 0; j < m; ++j)
        t.dates.push_back(date_from_serial(Date{2003, 1, 1}.serial() + j));
    return {std::move(t), std::move(labels)};
}

}  // namespace scenalloc::fixture

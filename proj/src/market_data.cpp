#include "scenalloc/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::market {

namespace {

struct RawTable {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;  // per date
    int dropped_rows = 0;
};

// Parses a `date,<name>...` file. Rows with a blank cell are dropped and
// counted; anything else malformed is an error.
RawTable parse_dated_csv(const std::string& path, const IngestConfig& config, bool require_positive) {
    CsvTable csv = read_csv(path);
    if (csv.header.empty() || csv.header[0] != "date")
        throw Error(ErrorKind::Schema,
                    strfmt("%s: first header column must be 'date', found '%s'", path.c_str(),
                           csv.header.empty() ? "" : csv.header[0].c_str()));
    if (csv.header.size() < 2)
        throw Error(ErrorKind::Schema, strfmt("%s: no data columns", path.c_str()));
    std::set<std::string> seen;
    for (size_t c = 1; c < csv.header.size(); ++c) {
        if (csv.header[c].empty())
            throw Error(ErrorKind::Schema, strfmt("%s: empty name for column %zu", path.c_str(), c + 1));
        if (!seen.insert(csv.header[c]).second)
            throw Error(ErrorKind::Schema, strfmt("%s: duplicate column '%s'", path.c_str(), csv.header[c].c_str()));
    }

    RawTable out;
    out.names.assign(csv.header.begin() + 1, csv.header.end());
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& cells = csv.rows[r];
        bool blank = false;
        for (const auto& cell : cells)
            if (cell.empty()) blank = true;
        if (blank) {
            ++out.dropped_rows;
            continue;
        }
        Date d = parse_date(cells[0], config.date_format);
        std::vector<double> values(cells.size() - 1);
        for (size_t c = 1; c < cells.size(); ++c) {
            char* end = nullptr;
            double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str() || *end != '\0' || !std::isfinite(v))
                throw Error(ErrorKind::Data, strfmt("%s: row %zu, column '%s': bad value '%s'", path.c_str(),
                                                    r + 2, csv.header[c].c_str(), cells[c].c_str()));
            if (require_positive && v <= 0.0)
                throw Error(ErrorKind::Data, strfmt("%s: row %zu, column '%s': non-positive price %s",
                                                    path.c_str(), r + 2, csv.header[c].c_str(), cells[c].c_str()));
            values[c - 1] = v;
        }
        if (!out.dates.empty() && !(out.dates.back() < d))
            throw Error(ErrorKind::Data,
                        strfmt("%s: row %zu: dates not strictly increasing at %s", path.c_str(), r + 2,
                               format_date(d).c_str()));
        out.dates.push_back(d);
        out.rows.push_back(std::move(values));
    }
    return out;
}

}  // namespace

std::pair<PriceTable, FeatureTable> load_market_csv(const std::string& prices_path,
                                                    const std::string& yields_path,
                                                    const IngestConfig& config, IngestReport* report) {
    RawTable praw = parse_dated_csv(prices_path, config, /*require_positive=*/true);
    RawTable yraw = parse_dated_csv(yields_path, config, /*require_positive=*/false);

    std::map<int, size_t> yindex;
    for (size_t i = 0; i < yraw.dates.size(); ++i) yindex[yraw.dates[i].serial()] = i;

    std::vector<size_t> pi, yi;
    for (size_t i = 0; i < praw.dates.size(); ++i) {
        auto it = yindex.find(praw.dates[i].serial());
        if (it != yindex.end()) {
            pi.push_back(i);
            yi.push_back(it->second);
        }
    }
    if (pi.empty())
        throw Error(ErrorKind::Data, "price and yield files share no dates (empty intersection)");

    if (report) {
        report->dropped_price_rows = praw.dropped_rows;
        report->dropped_yield_rows = yraw.dropped_rows;
        report->dropped_alignment = static_cast<int>(praw.dates.size() - pi.size() + yraw.dates.size() - yi.size());
    }

    PriceTable prices;
    prices.tickers = praw.names;
    prices.dates.reserve(pi.size());
    prices.prices.resize(static_cast<Eigen::Index>(praw.names.size()), static_cast<Eigen::Index>(pi.size()));
    for (size_t k = 0; k < pi.size(); ++k) {
        prices.dates.push_back(praw.dates[pi[k]]);
        for (size_t a = 0; a < praw.names.size(); ++a)
            prices.prices(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = praw.rows[pi[k]][a];
    }

    FeatureTable features;
    features.tenors = yraw.names;
    features.dates = prices.dates;
    features.yields.resize(static_cast<Eigen::Index>(yraw.names.size()), static_cast<Eigen::Index>(yi.size()));
    for (size_t k = 0; k < yi.size(); ++k)
        for (size_t f = 0; f < yraw.names.size(); ++f)
            features.yields(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = yraw.rows[yi[k]][f];

    return {std::move(prices), std::move(features)};
}

ScenarioTable build_scenario_table(const PriceTable& prices, const FeatureTable& features,
                                   int horizon_days) {
    if (horizon_days < 1) throw Error(ErrorKind::Parameter, "horizon_days must be >= 1");
    if (prices.n_dates() != features.n_dates())
        throw Error(ErrorKind::Shape, "price and feature tables are not date-aligned");
    const Eigen::Index T = prices.n_dates();
    const Eigen::Index h = horizon_days;
    if (T <= h)
        throw Error(ErrorKind::InsufficientData,
                    strfmt("need more than %d rows to form %d-day returns, have %lld", horizon_days,
                           horizon_days, static_cast<long long>(T)));

    ScenarioTable out;
    out.tickers = prices.tickers;
    out.tenors = features.tenors;
    out.horizon_days = horizon_days;
    const Eigen::Index m = T - h;
    out.R.resize(prices.n_assets(), m);
    out.F.resize(features.n_features(), m);
    out.dates.assign(prices.dates.begin(), prices.dates.begin() + m);
    for (Eigen::Index t = 0; t < m; ++t) {
        out.R.col(t) = prices.prices.col(t + h).cwiseQuotient(prices.prices.col(t)).array() - 1.0;
        out.F.col(t) = features.yields.col(t);
    }
    if (!out.R.allFinite() || !out.F.allFinite())
        throw Error(ErrorKind::Numeric, "scenario table contains non-finite entries");
    return out;
}

ScenarioTable slice_window(const ScenarioTable& table, const Date& start, const Date& end) {
    if (!(start < end)) throw Error(ErrorKind::Parameter, "window start must precede end");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < table.n_scenarios(); ++j)
        if (!(table.dates[static_cast<size_t>(j)] < start) && !(end < table.dates[static_cast<size_t>(j)]))
            keep.push_back(j);
    if (keep.empty())
        throw Error(ErrorKind::EmptyWindow, strfmt("no scenario anchors in [%s, %s]",
                                                   format_date(start).c_str(), format_date(end).c_str()));
    ScenarioTable out;
    out.tickers = table.tickers;
    out.tenors = table.tenors;
    out.horizon_days = table.horizon_days;
    out.R.resize(table.n_assets(), static_cast<Eigen::Index>(keep.size()));
    out.F.resize(table.n_features(), static_cast<Eigen::Index>(keep.size()));
    out.dates.reserve(keep.size());
    for (size_t k = 0; k < keep.size(); ++k) {
        out.R.col(static_cast<Eigen::Index>(k)) = table.R.col(keep[k]);
        out.F.col(static_cast<Eigen::Index>(k)) = table.F.col(keep[k]);
        out.dates.push_back(table.dates[static_cast<size_t>(keep[k])]);
    }
    return out;
}

void write_scenario_csv(const std::string& path, const ScenarioTable& table,
                        const std::vector<int>* cluster_ids, const std::vector<std::string>& comments) {
    const Eigen::Index m = table.n_scenarios();
    bool with_dates = static_cast<Eigen::Index>(table.dates.size()) == m && m > 0;
    std::vector<std::string> header;
    if (with_dates) header.push_back("date");
    for (const auto& t : table.tickers) header.push_back("ret:" + t);
    for (const auto& t : table.tenors) header.push_back("feat:" + t);
    if (cluster_ids) header.push_back("cluster");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        std::vector<std::string> row;
        if (with_dates) row.push_back(format_date(table.dates[static_cast<size_t>(j)]));
        for (Eigen::Index i = 0; i < table.n_assets(); ++i) row.push_back(fmt_double(table.R(i, j)));
        for (Eigen::Index i = 0; i < table.n_features(); ++i) row.push_back(fmt_double(table.F(i, j)));
        if (cluster_ids) row.push_back(std::to_string((*cluster_ids)[static_cast<size_t>(j)]));
        rows.push_back(std::move(row));
    }
    write_csv(path, comments, header, rows);
}

ScenarioCsv read_scenario_csv(const std::string& path) {
    CsvTable csv = read_csv(path);
    std::vector<size_t> ret_cols, feat_cols;
    int date_col = -1, cluster_col = -1;
    ScenarioCsv out;
    for (size_t c = 0; c < csv.header.size(); ++c) {
        const std::string& h = csv.header[c];
        if (h == "date") {
            date_col = static_cast<int>(c);
        } else if (h == "cluster") {
            cluster_col = static_cast<int>(c);
        } else if (h.rfind("ret:", 0) == 0) {
            ret_cols.push_back(c);
            out.table.tickers.push_back(h.substr(4));
        } else if (h.rfind("feat:", 0) == 0) {
            feat_cols.push_back(c);
            out.table.tenors.push_back(h.substr(5));
        } else {
            // Plain matrix: every unprefixed non-date column is an asset.
            ret_cols.push_back(c);
            out.table.tickers.push_back(h);
        }
    }
    if (ret_cols.empty()) throw Error(ErrorKind::Schema, strfmt("%s: no return columns", path.c_str()));

    const size_t m = csv.rows.size();
    out.table.R.resize(static_cast<Eigen::Index>(ret_cols.size()), static_cast<Eigen::Index>(m));
    out.table.F.resize(static_cast<Eigen::Index>(feat_cols.size()), static_cast<Eigen::Index>(m));
    auto parse_cell = [&](size_t r, size_t c) {
        char* end = nullptr;
        double v = std::strtod(csv.rows[r][c].c_str(), &end);
        if (end == csv.rows[r][c].c_str() || *end != '\0' || !std::isfinite(v))
            throw Error(ErrorKind::Data, strfmt("%s: row %zu, column '%s': bad value '%s'", path.c_str(),
                                                r + 2, csv.header[c].c_str(), csv.rows[r][c].c_str()));
        return v;
    };
    for (size_t r = 0; r < m; ++r) {
        if (date_col >= 0) out.table.dates.push_back(parse_date(csv.rows[r][static_cast<size_t>(date_col)]));
        for (size_t k = 0; k < ret_cols.size(); ++k)
            out.table.R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) = parse_cell(r, ret_cols[k]);
        for (size_t k = 0; k < feat_cols.size(); ++k)
            out.table.F(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) = parse_cell(r, feat_cols[k]);
        if (cluster_col >= 0)
            out.cluster_ids.push_back(static_cast<int>(parse_cell(r, static_cast<size_t>(cluster_col))));
    }
    return out;
}

}  // namespace scenalloc::market

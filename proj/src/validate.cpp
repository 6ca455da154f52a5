#include "scenalloc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::validate {

namespace {

// Pearson correlation matrix with a validity mask for zero-variance columns.
std::pair<Eigen::MatrixXd, std::vector<bool>> correlation(const Eigen::MatrixXd& data) {
    const Eigen::Index m = data.rows();
    const Eigen::Index d = data.cols();
    Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    Eigen::VectorXd norms(d);
    std::vector<bool> valid(static_cast<size_t>(d), true);
    for (Eigen::Index c = 0; c < d; ++c) {
        norms(c) = centered.col(c).norm();
        if (norms(c) < 1e-12 * std::sqrt(static_cast<double>(m))) valid[static_cast<size_t>(c)] = false;
    }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = a; b < d; ++b) {
            if (valid[static_cast<size_t>(a)] && valid[static_cast<size_t>(b)]) {
                corr(a, b) = centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b));
                corr(b, a) = corr(a, b);
            }
        }
    }
    return {corr, valid};
}

Eigen::MatrixXd samples_of(const market::ScenarioTable& t) {
    Eigen::MatrixXd out(t.n_scenarios(), t.n_assets() + t.n_features());
    out << t.R.transpose(), t.F.transpose();
    return out;
}

}  // namespace

double ks_complement(const Eigen::VectorXd& original, const Eigen::VectorXd& synthetic) {
    const Eigen::Index n1 = original.size(), n2 = synthetic.size();
    if (n1 == 0 || n2 == 0) throw Error(ErrorKind::Parameter, "ks_complement: empty sample");
    std::vector<double> a(original.data(), original.data() + n1);
    std::vector<double> b(synthetic.data(), synthetic.data() + n2);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < a.size() || j < b.size()) {
        double v = std::numeric_limits<double>::infinity();
        if (i < a.size()) v = a[i];
        if (j < b.size()) v = std::min(v, b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        double gap = std::abs(static_cast<double>(i) / static_cast<double>(n1) -
                              static_cast<double>(j) / static_cast<double>(n2));
        sup = std::max(sup, gap);
    }
    return 1.0 - sup;
}

Eigen::MatrixXd correlation_similarity(const Eigen::MatrixXd& original,
                                       const Eigen::MatrixXd& synthetic) {
    if (original.cols() != synthetic.cols())
        throw Error(ErrorKind::Shape, "correlation_similarity: column counts differ");
    if (original.rows() < 3 || synthetic.rows() < 3)
        throw Error(ErrorKind::InsufficientData, "correlation_similarity: need at least 3 rows");
    auto [co, vo] = correlation(original);
    auto [cs, vs] = correlation(synthetic);
    const Eigen::Index d = original.cols();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd sim(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            if (a == b) {
                sim(a, b) = 1.0;
            } else if (vo[static_cast<size_t>(a)] && vo[static_cast<size_t>(b)] &&
                       vs[static_cast<size_t>(a)] && vs[static_cast<size_t>(b)]) {
                sim(a, b) = 1.0 - std::abs(co(a, b) - cs(a, b));
            } else {
                sim(a, b) = nan;
            }
        }
    }
    return sim;
}

ValidationReport validation_report(const market::ScenarioTable& original,
                                   const market::ScenarioTable& synthetic) {
    if (original.n_assets() != synthetic.n_assets() ||
        original.n_features() != synthetic.n_features())
        throw Error(ErrorKind::Shape, "validation: variable sets differ");

    ValidationReport report;
    for (const auto& t : original.tickers) report.variable_names.push_back("ret:" + t);
    for (const auto& t : original.tenors) report.variable_names.push_back("feat:" + t);

    Eigen::MatrixXd orig = samples_of(original);
    Eigen::MatrixXd synth = samples_of(synthetic);

    const Eigen::Index d = orig.cols();
    report.ks_scores.resize(d);
    for (Eigen::Index c = 0; c < d; ++c)
        report.ks_scores(c) = ks_complement(orig.col(c), synth.col(c));
    report.mean_ks = report.ks_scores.mean();

    report.corr_similarity = correlation_similarity(orig, synth);
    double min_sim = 1.0;
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            if (std::isfinite(report.corr_similarity(a, b)))
                min_sim = std::min(min_sim, report.corr_similarity(a, b));
    report.min_corr_sim = min_sim;
    return report;
}

void write_validation_artifacts(const ValidationReport& report,
                                const market::ScenarioTable& original,
                                const market::ScenarioTable& synthetic, const std::string& out_dir,
                                const std::vector<std::string>& comments) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nlohmann::json j;
    j["mean_ks"] = report.mean_ks;
    j["min_corr_similarity"] = report.min_corr_sim;
    nlohmann::json ks = nlohmann::json::object();
    for (size_t i = 0; i < report.variable_names.size(); ++i)
        ks[report.variable_names[i]] = report.ks_scores(static_cast<Eigen::Index>(i));
    j["ks_complement"] = ks;
    for (const auto& c : comments) j["_meta"].push_back(c);
    write_text_file((fs::path(out_dir) / "report.json").string(), j.dump(1));

    {
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < report.variable_names.size(); ++i)
            rows.push_back({report.variable_names[i], fmt_double(report.ks_scores(static_cast<Eigen::Index>(i)))});
        write_csv((fs::path(out_dir) / "ks.csv").string(), comments, {"variable", "ks_complement"}, rows);
    }

    {
        std::vector<std::string> header{"variable"};
        for (const auto& n : report.variable_names) header.push_back(n);
        std::vector<std::vector<std::string>> rows;
        for (size_t a = 0; a < report.variable_names.size(); ++a) {
            std::vector<std::string> row{report.variable_names[a]};
            for (size_t b = 0; b < report.variable_names.size(); ++b) {
                double v = report.corr_similarity(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                row.push_back(std::isfinite(v) ? fmt_double(v) : "");
            }
            rows.push_back(std::move(row));
        }
        write_csv((fs::path(out_dir) / "corr_similarity.csv").string(), comments, header, rows);
    }

    // Pair-plot long data: within-group pairs (returns with returns, features
    // with features), strided down to at most 300 rows per source.
    {
        Eigen::MatrixXd orig = samples_of(original);
        Eigen::MatrixXd synth = samples_of(synthetic);
        const Eigen::Index n = original.n_assets();
        const Eigen::Index l = original.n_features();
        std::vector<std::vector<std::string>> rows;
        auto emit = [&](const Eigen::MatrixXd& data, const char* source) {
            const Eigen::Index m = data.rows();
            const Eigen::Index stride = std::max<Eigen::Index>(1, m / 300);
            auto emit_group = [&](Eigen::Index start, Eigen::Index count) {
                for (Eigen::Index a = start; a < start + count; ++a)
                    for (Eigen::Index b = start; b < start + count; ++b)
                        for (Eigen::Index r = 0; r < m; r += stride)
                            rows.push_back({report.variable_names[static_cast<size_t>(a)],
                                            report.variable_names[static_cast<size_t>(b)], source,
                                            fmt_double(data(r, a)), fmt_double(data(r, b))});
            };
            emit_group(0, n);
            emit_group(n, l);
        };
        emit(orig, "original");
        emit(synth, "synthetic");
        write_csv((fs::path(out_dir) / "pairplot_data.csv").string(), comments,
                  {"variable_x", "variable_y", "source", "value_x", "value_y"}, rows);
    }
}

}  // namespace scenalloc::validate

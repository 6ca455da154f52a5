#include "scenalloc/zscore.hpp"

#include "scenalloc/errors.hpp"

namespace scenalloc::prep {

std::pair<Eigen::MatrixXd, NormalizationStats> zscore_fit_apply(const Eigen::MatrixXd& data) {
    const Eigen::Index m = data.rows();
    const Eigen::Index d = data.cols();
    if (m < 2)
        throw Error(ErrorKind::InsufficientData,
                    strfmt("z-score needs at least 2 samples, have %lld", static_cast<long long>(m)));
    if (!data.allFinite()) throw Error(ErrorKind::Numeric, "z-score input contains non-finite values");

    NormalizationStats stats;
    stats.means = data.colwise().mean();
    stats.stds.resize(d);
    stats.degenerate.assign(static_cast<size_t>(d), false);
    for (Eigen::Index c = 0; c < d; ++c) {
        double var = (data.col(c).array() - stats.means(c)).square().sum() / static_cast<double>(m);
        stats.stds(c) = std::sqrt(var);
        if (stats.stds(c) < NormalizationStats::kDegenerateTol) stats.degenerate[static_cast<size_t>(c)] = true;
    }
    return {zscore_apply(stats, data), stats};
}

Eigen::MatrixXd zscore_apply(const NormalizationStats& stats, const Eigen::MatrixXd& data) {
    if (data.cols() != stats.means.size())
        throw Error(ErrorKind::Shape, strfmt("z-score stats cover %lld columns, data has %lld",
                                             static_cast<long long>(stats.means.size()),
                                             static_cast<long long>(data.cols())));
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (stats.degenerate[static_cast<size_t>(c)])
            out.col(c).setZero();
        else
            out.col(c) = (data.col(c).array() - stats.means(c)) / stats.stds(c);
    }
    return out;
}

Eigen::MatrixXd zscore_invert(const NormalizationStats& stats, const Eigen::MatrixXd& normalized) {
    if (normalized.cols() != stats.means.size())
        throw Error(ErrorKind::Shape, "z-score invert: column count mismatch");
    Eigen::MatrixXd out(normalized.rows(), normalized.cols());
    for (Eigen::Index c = 0; c < normalized.cols(); ++c) {
        if (stats.degenerate[static_cast<size_t>(c)])
            out.col(c).setConstant(stats.means(c));
        else
            out.col(c) = normalized.col(c).array() * stats.stds(c) + stats.means(c);
    }
    return out;
}

}  // namespace scenalloc::prep

#include "scenalloc/pca.hpp"

#include <algorithm>
#include <numeric>

#include "scenalloc/errors.hpp"

namespace scenalloc::prep {

PcaModel pca_fit(const Eigen::MatrixXd& data) {
    auto [normalized, stats] = zscore_fit_apply(data);
    const Eigen::Index m = normalized.rows();
    const Eigen::Index d = normalized.cols();

    Eigen::MatrixXd cov = (normalized.transpose() * normalized) / static_cast<double>(m);
    if (!cov.allFinite()) throw Error(ErrorKind::Numeric, "covariance has non-finite entries");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "eigendecomposition failed");

    // Eigen returns ascending eigenvalues; reorder descending.
    std::vector<Eigen::Index> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return solver.eigenvalues()(a) > solver.eigenvalues()(b); });

    PcaModel model;
    model.column_stats = std::move(stats);
    model.eigenvectors.resize(d, d);
    model.eigenvalues.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        model.eigenvalues(k) = std::max(0.0, solver.eigenvalues()(order[static_cast<size_t>(k)]));
        Eigen::VectorXd v = solver.eigenvectors().col(order[static_cast<size_t>(k)]);
        // Sign convention: largest-magnitude coordinate positive.
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0) v = -v;
        model.eigenvectors.col(k) = v;
    }
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data) {
    if (data.cols() != model.dim())
        throw Error(ErrorKind::Shape, strfmt("PCA model dimension %lld, data has %lld columns",
                                             static_cast<long long>(model.dim()),
                                             static_cast<long long>(data.cols())));
    return zscore_apply(model.column_stats, data) * model.eigenvectors;
}

Eigen::MatrixXd pca_inverse(const PcaModel& model, const Eigen::MatrixXd& scores) {
    if (scores.cols() != model.dim())
        throw Error(ErrorKind::Shape, strfmt("PCA model dimension %lld, scores have %lld columns",
                                             static_cast<long long>(model.dim()),
                                             static_cast<long long>(scores.cols())));
    return zscore_invert(model.column_stats, scores * model.eigenvectors.transpose());
}

}  // namespace scenalloc::prep

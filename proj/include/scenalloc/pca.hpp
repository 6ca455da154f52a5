#pragma once

#include <Eigen/Dense>

#include "scenalloc/zscore.hpp"

namespace scenalloc::prep {

// Full-rank PCA of z-scored data. All components are kept so the projection
// is lossless and invertible; transform/inverse fold the z-score step in.
struct PcaModel {
    NormalizationStats column_stats;
    Eigen::MatrixXd eigenvectors;  // d x d, columns are components, orthonormal
    Eigen::VectorXd eigenvalues;   // descending, >= 0 (clamped)

    Eigen::Index dim() const { return eigenvectors.rows(); }
};

// rows = samples, cols = variables (raw, un-normalized).
PcaModel pca_fit(const Eigen::MatrixXd& data);

// Raw data -> component scores.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data);
// Component scores -> raw data (un-normalized).
Eigen::MatrixXd pca_inverse(const PcaModel& model, const Eigen::MatrixXd& scores);

}  // namespace scenalloc::prep

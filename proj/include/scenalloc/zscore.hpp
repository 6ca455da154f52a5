#pragma once

#include <vector>

#include <Eigen/Dense>

namespace scenalloc::prep {

// Per-column mean/std pairs. The population (1/m) std convention is used
// everywhere in this codebase.
struct NormalizationStats {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;
    std::vector<bool> degenerate;  // std below tolerance; such columns z-score to 0

    static constexpr double kDegenerateTol = 1e-12;
};

// Fits stats on `data` (rows = samples, cols = variables) and returns the
// normalized copy. Degenerate columns come back as zeros.
std::pair<Eigen::MatrixXd, NormalizationStats> zscore_fit_apply(const Eigen::MatrixXd& data);

Eigen::MatrixXd zscore_apply(const NormalizationStats& stats, const Eigen::MatrixXd& data);
Eigen::MatrixXd zscore_invert(const NormalizationStats& stats, const Eigen::MatrixXd& normalized);

}  // namespace scenalloc::prep

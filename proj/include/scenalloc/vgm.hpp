#pragma once

#include <vector>

#include <Eigen/Dense>

namespace scenalloc::prep {

// Per-column Gaussian mixture used for mode-specific normalization. Fitted
// with a variational (Dirichlet-process weight prior) scheme so superfluous
// components starve and fall under the prune threshold.
struct VgmColumnModel {
    Eigen::VectorXd means;    // active modes
    Eigen::VectorXd stds;     // floored at kStdFloor
    Eigen::VectorXd weights;  // renormalized after pruning, sums to 1
    std::vector<int> active_mode_indices;  // surviving modes, ascending by mean
    bool converged = true;

    static constexpr double kStdFloor = 1e-4;

    int n_modes() const { return static_cast<int>(means.size()); }
};

struct VgmFitParams {
    int max_modes = 10;
    double prune_weight = 0.005;
    int max_iterations = 500;
    double tol = 1e-7;  // on mean absolute responsibility change
};

VgmColumnModel vgm_fit_column(const Eigen::VectorXd& column, const VgmFitParams& params = {});

struct ModeEncoding {
    double alpha = 0.0;  // (value - mean) / (4 std), clipped to [-1, 1]
    int mode = 0;        // argmax posterior responsibility
};

ModeEncoding mode_transform(const VgmColumnModel& model, double value);
double mode_inverse(const VgmColumnModel& model, double alpha, int mode);

}  // namespace scenalloc::prep

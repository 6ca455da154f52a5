#pragma once

#include <optional>

#include <Eigen/Dense>

#include "scenalloc/lp.hpp"
#include "scenalloc/zscore.hpp"

namespace scenalloc::cvar {

// Probability weights over scenarios: nonnegative, summing to 1.
struct DensityVector {
    Eigen::VectorXd weights;

    Eigen::Index size() const { return weights.size(); }
};

struct RiskSpec {
    double alpha = 0.95;   // CVaR confidence in (0,1)
    double lambda = 0.15;  // risk budget, decimal annual loss (> 0)
};

enum class SolveStatus { Optimal, Infeasible, NotConverged };

struct Allocation {
    Eigen::VectorXd x;          // long-only weights, sum to 1
    double xi = 0.0;            // VaR auxiliary at the optimum
    Eigen::VectorXd z;          // tail-excess auxiliaries
    double objective = 0.0;     // density-weighted expected return
    double empirical_cvar = 0.0;
    bool cvar_constraint_active = false;
    SolveStatus status = SolveStatus::Optimal;
    int iterations = 0;
    // Infeasibility diagnostics: the smallest attainable CVaR over the
    // simplex and the portfolio achieving it.
    double min_feasible_lambda = 0.0;
    Eigen::VectorXd min_cvar_x;
};

DensityVector uniform_density(Eigen::Index m);

// Euclidean distance between normalized feature vectors.
double feature_distance(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2);

// pi_q proportional to 1 / max(d(f, f_q), epsilon) on z-scored features.
// `sample_features` is l x m (one column per scenario); `today` is the raw
// present-day feature vector; both are normalized with `stats`.
DensityVector density_from_features(const Eigen::MatrixXd& sample_features,
                                    const Eigen::VectorXd& today,
                                    const prep::NormalizationStats& stats);

// Density-weighted expected portfolio return. R is n x m.
double expected_return(const Eigen::MatrixXd& R, const Eigen::VectorXd& x,
                       const DensityVector& density);

// Discrete CVaR of losses L_j = -(R^T x)_j at confidence alpha: expected loss
// of the worst (1-alpha) probability mass, boundary scenario split
// fractionally.
double empirical_cvar(const Eigen::MatrixXd& R, const Eigen::VectorXd& x,
                      const DensityVector& density, double alpha);
double empirical_cvar_of_losses(Eigen::VectorXd losses, Eigen::VectorXd weights, double alpha);

// Maximize density-weighted expected return subject to CVaR(losses) <= lambda,
// sum x = 1, x >= 0, via the linearized tail formulation. When infeasible the
// result carries the min-CVaR portfolio as a diagnostic.
Allocation solve_allocation(const Eigen::MatrixXd& R, const DensityVector& density,
                            const RiskSpec& risk, const LpSolverFn* solver = nullptr);

// The auxiliary problem: smallest attainable CVaR over the simplex.
std::pair<double, Eigen::VectorXd> solve_min_cvar(const Eigen::MatrixXd& R,
                                                  const DensityVector& density, double alpha,
                                                  const LpSolverFn* solver = nullptr);

}  // namespace scenalloc::cvar

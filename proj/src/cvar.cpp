#include "scenalloc/cvar.hpp"

#include <algorithm>
#include <numeric>

#include "scenalloc/errors.hpp"

namespace scenalloc::cvar {

namespace {

constexpr double kDistanceFloor = 1e-9;

void check_density(const DensityVector& density) {
    if (density.size() == 0) throw Error(ErrorKind::Parameter, "empty density vector");
    if ((density.weights.array() < 0).any())
        throw Error(ErrorKind::Parameter, "density weights must be nonnegative");
    if (std::abs(density.weights.sum() - 1.0) > 1e-10)
        throw Error(ErrorKind::Parameter, "density weights must sum to 1");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::Parameter, strfmt("alpha must be in (0,1), got %g", alpha));
}

// Rows: [0] sum x = 1; [1] budget xi + pi^T z/(1-alpha) <= lambda (optional);
// then one tail row per scenario: (R^T x)_j + z_j + xi >= 0.
// Columns: x (n), z (m), xi+, xi-.
LpProblem build_problem(const Eigen::MatrixXd& R, const DensityVector& density, double alpha,
                        std::optional<double> lambda, bool objective_min_cvar) {
    const Eigen::Index n = R.rows();
    const Eigen::Index m = R.cols();
    const Eigen::Index cols = n + m + 2;
    const Eigen::Index rows = (lambda ? 2 : 1) + m;
    const double tail_scale = 1.0 / (1.0 - alpha);

    LpProblem p;
    p.A = Eigen::MatrixXd::Zero(rows, cols);
    p.b = Eigen::VectorXd::Zero(rows);
    p.c = Eigen::VectorXd::Zero(cols);
    p.relations.assign(static_cast<size_t>(rows), Relation::GE);

    // Objective.
    if (objective_min_cvar) {
        for (Eigen::Index j = 0; j < m; ++j) p.c(n + j) = tail_scale * density.weights(j);
        p.c(n + m) = 1.0;   // xi+
        p.c(n + m + 1) = -1.0;  // xi-
    } else {
        p.c.head(n) = -(R * density.weights);  // maximize expected return
    }

    Eigen::Index row = 0;
    // sum x = 1
    p.A.row(row).head(n).setOnes();
    p.b(row) = 1.0;
    p.relations[static_cast<size_t>(row)] = Relation::EQ;
    ++row;

    if (lambda) {
        for (Eigen::Index j = 0; j < m; ++j) p.A(row, n + j) = tail_scale * density.weights(j);
        p.A(row, n + m) = 1.0;
        p.A(row, n + m + 1) = -1.0;
        p.b(row) = *lambda;
        p.relations[static_cast<size_t>(row)] = Relation::LE;
        ++row;
    }

    for (Eigen::Index j = 0; j < m; ++j) {
        p.A.row(row).head(n) = R.col(j).transpose();
        p.A(row, n + j) = 1.0;
        p.A(row, n + m) = 1.0;
        p.A(row, n + m + 1) = -1.0;
        p.b(row) = 0.0;
        p.relations[static_cast<size_t>(row)] = Relation::GE;
        ++row;
    }
    return p;
}

LpSolution dispatch(const LpProblem& p, const LpSolverFn* solver) {
    return solver && *solver ? (*solver)(p) : solve_lp(p);
}

}  // namespace

DensityVector uniform_density(Eigen::Index m) {
    if (m < 1) throw Error(ErrorKind::Parameter, "need at least one scenario");
    DensityVector d;
    d.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    return d;
}

double feature_distance(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) {
    if (f1.size() != f2.size())
        throw Error(ErrorKind::Shape, strfmt("feature vectors differ in length: %lld vs %lld",
                                             static_cast<long long>(f1.size()),
                                             static_cast<long long>(f2.size())));
    return (f1 - f2).norm();
}

DensityVector density_from_features(const Eigen::MatrixXd& sample_features,
                                    const Eigen::VectorXd& today,
                                    const prep::NormalizationStats& stats) {
    const Eigen::Index m = sample_features.cols();
    if (m == 0) throw Error(ErrorKind::Parameter, "no sample features");
    if (sample_features.rows() != today.size())
        throw Error(ErrorKind::Shape, "present-day feature length does not match samples");

    Eigen::MatrixXd samples_norm = prep::zscore_apply(stats, sample_features.transpose());  // m x l
    Eigen::VectorXd today_norm = prep::zscore_apply(stats, today.transpose()).row(0).transpose();

    DensityVector d;
    d.weights.resize(m);
    for (Eigen::Index q = 0; q < m; ++q) {
        double dist = (samples_norm.row(q).transpose() - today_norm).norm();
        d.weights(q) = 1.0 / std::max(dist, kDistanceFloor);
    }
    d.weights /= d.weights.sum();
    return d;
}

double expected_return(const Eigen::MatrixXd& R, const Eigen::VectorXd& x,
                       const DensityVector& density) {
    if (R.rows() != x.size() || R.cols() != density.size())
        throw Error(ErrorKind::Shape, "expected_return: dimension mismatch");
    return density.weights.dot(R.transpose() * x);
}

double empirical_cvar_of_losses(Eigen::VectorXd losses, Eigen::VectorXd weights, double alpha) {
    check_alpha(alpha);
    if (losses.size() != weights.size() || losses.size() == 0)
        throw Error(ErrorKind::Shape, "empirical_cvar: losses/weights mismatch");

    const Eigen::Index m = losses.size();
    std::vector<Eigen::Index> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return losses(a) > losses(b); });

    const double tail_mass = 1.0 - alpha;
    double remaining = tail_mass;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < m && remaining > 1e-15; ++k) {
        Eigen::Index j = order[static_cast<size_t>(k)];
        double take = std::min(weights(j), remaining);
        acc += take * losses(j);
        remaining -= take;
    }
    return acc / tail_mass;
}

double empirical_cvar(const Eigen::MatrixXd& R, const Eigen::VectorXd& x,
                      const DensityVector& density, double alpha) {
    if (R.rows() != x.size() || R.cols() != density.size())
        throw Error(ErrorKind::Shape, "empirical_cvar: dimension mismatch");
    Eigen::VectorXd losses = -(R.transpose() * x);
    return empirical_cvar_of_losses(std::move(losses), density.weights, alpha);
}

std::pair<double, Eigen::VectorXd> solve_min_cvar(const Eigen::MatrixXd& R,
                                                  const DensityVector& density, double alpha,
                                                  const LpSolverFn* solver) {
    check_alpha(alpha);
    check_density(density);
    LpProblem p = build_problem(R, density, alpha, std::nullopt, /*objective_min_cvar=*/true);
    LpSolution sol = dispatch(p, solver);
    if (sol.status != LpStatus::Optimal)
        throw Error(ErrorKind::Numeric, "min-CVaR auxiliary problem did not solve");
    const Eigen::Index n = R.rows();
    Eigen::VectorXd x = sol.x.head(n);
    double s = x.sum();
    if (s > 0) x /= s;
    return {sol.objective, x};
}

Allocation solve_allocation(const Eigen::MatrixXd& R, const DensityVector& density,
                            const RiskSpec& risk, const LpSolverFn* solver) {
    check_alpha(risk.alpha);
    check_density(density);
    if (!(risk.lambda > 0.0)) throw Error(ErrorKind::Parameter, "lambda must be positive");
    if (!R.allFinite()) throw Error(ErrorKind::Numeric, "returns matrix contains non-finite entries");
    if (R.cols() != density.size()) throw Error(ErrorKind::Shape, "returns/density mismatch");

    const Eigen::Index n = R.rows();
    const Eigen::Index m = R.cols();

    LpProblem p = build_problem(R, density, risk.alpha, risk.lambda, /*objective_min_cvar=*/false);
    LpSolution sol = dispatch(p, solver);

    Allocation out;
    out.iterations = sol.iterations;
    if (sol.status == LpStatus::Infeasible) {
        out.status = SolveStatus::Infeasible;
        auto [min_cvar, min_x] = solve_min_cvar(R, density, risk.alpha, solver);
        out.min_feasible_lambda = min_cvar;
        out.min_cvar_x = min_x;
        return out;
    }
    if (sol.status != LpStatus::Optimal) {
        out.status = SolveStatus::NotConverged;
        return out;
    }

    out.status = SolveStatus::Optimal;
    out.x = sol.x.head(n);
    // Clean tiny simplex violations from floating-point pivoting.
    out.x = out.x.cwiseMax(0.0);
    out.x /= out.x.sum();
    out.z = sol.x.segment(n, m);
    out.xi = sol.x(n + m) - sol.x(n + m + 1);
    out.objective = expected_return(R, out.x, density);
    out.empirical_cvar = empirical_cvar(R, out.x, density, risk.alpha);
    // Active means the risk cap actually restricts the optimum, not merely
    // that the budget row sits tight at a degenerate vertex.
    out.cvar_constraint_active = out.empirical_cvar > risk.lambda - 1e-6;
    return out;
}

}  // namespace scenalloc::cvar

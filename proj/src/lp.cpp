#include "scenalloc/lp.hpp"

#include <cmath>

#include "scenalloc/errors.hpp"

namespace scenalloc::cvar {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;
constexpr int kRefactorEvery = 150;
constexpr int kDegenerateBeforeBland = 400;

// Tableau-free simplex state over the standardized problem
//   min c^T v,  N v = b,  v >= 0
// where v = [structural | slack/surplus | artificial].
struct Standardized {
    Eigen::MatrixXd A;  // rows x total_cols
    Eigen::VectorXd b;  // >= 0
    Eigen::VectorXd cost_phase2;
    Eigen::Index n_structural = 0;
    Eigen::Index first_artificial = 0;     // columns >= this are artificial
    std::vector<Eigen::Index> start_col;   // per-row initial basic column
};

Standardized standardize(const LpProblem& p) {
    const Eigen::Index rows = p.A.rows();
    const Eigen::Index n = p.A.cols();
    if (p.b.size() != rows || static_cast<Eigen::Index>(p.relations.size()) != rows || p.c.size() != n)
        throw Error(ErrorKind::Shape, "LP problem dimensions are inconsistent");

    // Count slacks: one per inequality row.
    Eigen::Index n_slack = 0;
    for (auto r : p.relations)
        if (r != Relation::EQ) ++n_slack;

    // Normalize b >= 0 (flip rows), then add slack/surplus and artificials.
    // After normalization a LE row has slack +1 which can start basic; GE and
    // EQ rows need an artificial.
    std::vector<Relation> rel(p.relations);
    Eigen::MatrixXd a = p.A;
    Eigen::VectorXd b = p.b;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (b(i) < 0) {
            a.row(i) = -a.row(i);
            b(i) = -b(i);
            if (rel[static_cast<size_t>(i)] == Relation::LE)
                rel[static_cast<size_t>(i)] = Relation::GE;
            else if (rel[static_cast<size_t>(i)] == Relation::GE)
                rel[static_cast<size_t>(i)] = Relation::LE;
        }
    }
    // Artificials are only needed where no slack/surplus can start basic:
    // equality rows, and >= rows with a positive right-hand side (a surplus
    // column may sit in the basis at level zero when b is 0).
    Eigen::Index n_artificial = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        Relation r = rel[static_cast<size_t>(i)];
        if (r == Relation::EQ || (r == Relation::GE && b(i) > 0.0)) ++n_artificial;
    }

    Standardized s;
    s.n_structural = n;
    s.first_artificial = n + n_slack;
    s.A = Eigen::MatrixXd::Zero(rows, n + n_slack + n_artificial);
    s.A.leftCols(n) = a;
    s.b = b;
    s.cost_phase2 = Eigen::VectorXd::Zero(n + n_slack + n_artificial);
    s.cost_phase2.head(n) = p.c;

    Eigen::Index slack_col = n;
    Eigen::Index art_col = s.first_artificial;
    s.start_col.resize(static_cast<size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
        switch (rel[static_cast<size_t>(i)]) {
            case Relation::LE:
                s.A(i, slack_col) = 1.0;
                s.start_col[static_cast<size_t>(i)] = slack_col;
                ++slack_col;
                break;
            case Relation::GE:
                s.A(i, slack_col) = -1.0;
                if (b(i) > 0.0) {
                    s.A(i, art_col) = 1.0;
                    s.start_col[static_cast<size_t>(i)] = art_col;
                    ++art_col;
                } else {
                    s.start_col[static_cast<size_t>(i)] = slack_col;
                }
                ++slack_col;
                break;
            case Relation::EQ:
                s.A(i, art_col) = 1.0;
                s.start_col[static_cast<size_t>(i)] = art_col;
                ++art_col;
                break;
        }
    }
    return s;
}

struct SimplexState {
    const Standardized* prob;
    std::vector<Eigen::Index> basis;     // one column per row
    std::vector<bool> in_basis;
    Eigen::MatrixXd b_inv;
    Eigen::VectorXd x_basic;
    int iterations = 0;

    void refactor() {
        const Eigen::Index rows = prob->A.rows();
        Eigen::MatrixXd basis_mat(rows, rows);
        for (Eigen::Index i = 0; i < rows; ++i) basis_mat.col(i) = prob->A.col(basis[static_cast<size_t>(i)]);
        b_inv = basis_mat.partialPivLu().inverse();
        x_basic = b_inv * prob->b;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (x_basic(i) < 0 && x_basic(i) > -1e-7) x_basic(i) = 0.0;
    }
};

// Runs simplex iterations with the given costs until optimal/unbounded.
// `allow` masks columns that may enter the basis. `a_t` is the precomputed
// transpose of the constraint matrix (pricing is the hot loop).
LpStatus run_simplex(SimplexState& st, const Eigen::MatrixXd& a_t, const Eigen::VectorXd& cost,
                     const std::vector<bool>& allow, int max_iterations) {
    const Standardized& p = *st.prob;
    const Eigen::Index rows = p.A.rows();
    const Eigen::Index cols = p.A.cols();

    int degenerate_run = 0;
    int since_refactor = 0;
    double last_objective = std::numeric_limits<double>::infinity();

    while (st.iterations < max_iterations) {
        // Reduced costs via the dual vector.
        Eigen::VectorXd c_b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) c_b(i) = cost(st.basis[static_cast<size_t>(i)]);
        Eigen::VectorXd y = st.b_inv.transpose() * c_b;

        Eigen::VectorXd reduced = cost;
        reduced.noalias() -= a_t * y;

        const bool bland = degenerate_run >= kDegenerateBeforeBland;
        Eigen::Index entering = -1;
        double most_negative = -kCostTol;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (st.in_basis[static_cast<size_t>(j)] || !allow[static_cast<size_t>(j)]) continue;
            double d = reduced(j);
            if (bland) {
                if (d < -kCostTol) {
                    entering = j;
                    break;
                }
            } else if (d < most_negative) {
                most_negative = d;
                entering = j;
            }
        }
        if (entering < 0) return LpStatus::Optimal;

        Eigen::VectorXd direction = st.b_inv * p.A.col(entering);
        Eigen::Index leaving_row = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (direction(i) > kPivotTol) {
                double ratio = st.x_basic(i) / direction(i);
                // Bland-compatible tie break: smallest basis column index.
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && leaving_row >= 0 &&
                     st.basis[static_cast<size_t>(i)] < st.basis[static_cast<size_t>(leaving_row)])) {
                    best_ratio = ratio;
                    leaving_row = i;
                }
            }
        }
        if (leaving_row < 0) return LpStatus::Unbounded;

        // Pivot: rank-1 product-form update of the basis inverse.
        double pivot = direction(leaving_row);
        Eigen::RowVectorXd pivot_row = st.b_inv.row(leaving_row) / pivot;
        Eigen::VectorXd masked = direction;
        masked(leaving_row) = 0.0;
        st.b_inv.noalias() -= masked * pivot_row;
        st.b_inv.row(leaving_row) = pivot_row;

        st.in_basis[static_cast<size_t>(st.basis[static_cast<size_t>(leaving_row)])] = false;
        st.basis[static_cast<size_t>(leaving_row)] = entering;
        st.in_basis[static_cast<size_t>(entering)] = true;

        st.x_basic -= best_ratio * direction;
        st.x_basic(leaving_row) = best_ratio;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (st.x_basic(i) < 0 && st.x_basic(i) > -1e-7) st.x_basic(i) = 0.0;

        ++st.iterations;
        if (++since_refactor >= kRefactorEvery) {
            st.refactor();
            since_refactor = 0;
        }

        double objective = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            objective += cost(st.basis[static_cast<size_t>(i)]) * st.x_basic(i);
        if (objective < last_objective - 1e-12)
            degenerate_run = 0;
        else
            ++degenerate_run;
        last_objective = objective;
    }
    return LpStatus::IterationLimit;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, int max_iterations) {
    Standardized p = standardize(problem);
    const Eigen::Index rows = p.A.rows();
    const Eigen::Index cols = p.A.cols();

    SimplexState st;
    st.prob = &p;
    st.in_basis.assign(static_cast<size_t>(cols), false);

    // Initial basis: the designated slack/surplus/artificial per row.
    st.basis.resize(static_cast<size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index chosen = p.start_col[static_cast<size_t>(i)];
        st.basis[static_cast<size_t>(i)] = chosen;
        st.in_basis[static_cast<size_t>(chosen)] = true;
    }
    st.refactor();

    LpSolution solution;
    const Eigen::MatrixXd a_t = p.A.transpose();

    // Phase 1: drive artificials to zero.
    bool have_artificials = p.first_artificial < cols;
    if (have_artificials) {
        Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(cols);
        for (Eigen::Index j = p.first_artificial; j < cols; ++j) phase1_cost(j) = 1.0;
        std::vector<bool> allow(static_cast<size_t>(cols), true);
        LpStatus status = run_simplex(st, a_t, phase1_cost, allow, max_iterations);
        solution.iterations = st.iterations;
        if (status == LpStatus::IterationLimit) {
            solution.status = status;
            return solution;
        }
        double infeasibility = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (st.basis[static_cast<size_t>(i)] >= p.first_artificial) infeasibility += st.x_basic(i);
        if (infeasibility > kPhase1Tol) {
            solution.status = LpStatus::Infeasible;
            return solution;
        }
        // Pivot lingering zero-level artificials out when possible.
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (st.basis[static_cast<size_t>(i)] < p.first_artificial) continue;
            Eigen::RowVectorXd row = st.b_inv.row(i) * p.A.leftCols(p.first_artificial);
            Eigen::Index replacement = -1;
            for (Eigen::Index j = 0; j < p.first_artificial; ++j) {
                if (!st.in_basis[static_cast<size_t>(j)] && std::abs(row(j)) > 1e-7) {
                    replacement = j;
                    break;
                }
            }
            if (replacement < 0) continue;  // redundant row; artificial stays at zero
            Eigen::VectorXd direction = st.b_inv * p.A.col(replacement);
            double pivot = direction(i);
            Eigen::RowVectorXd pivot_row = st.b_inv.row(i) / pivot;
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (r == i) continue;
                st.b_inv.row(r) -= direction(r) * pivot_row;
            }
            st.b_inv.row(i) = pivot_row;
            st.in_basis[static_cast<size_t>(st.basis[static_cast<size_t>(i)])] = false;
            st.basis[static_cast<size_t>(i)] = replacement;
            st.in_basis[static_cast<size_t>(replacement)] = true;
            st.x_basic = st.b_inv * p.b;
        }
    }

    // Phase 2: artificials may not re-enter.
    std::vector<bool> allow(static_cast<size_t>(cols), true);
    for (Eigen::Index j = p.first_artificial; j < cols; ++j) allow[static_cast<size_t>(j)] = false;
    LpStatus status = run_simplex(st, a_t, p.cost_phase2, allow, max_iterations);
    solution.iterations = st.iterations;
    solution.status = status;
    if (status != LpStatus::Optimal) return solution;

    solution.x = Eigen::VectorXd::Zero(p.n_structural);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index j = st.basis[static_cast<size_t>(i)];
        if (j < p.n_structural) solution.x(j) = std::max(0.0, st.x_basic(i));
    }
    solution.objective = problem.c.dot(solution.x);
    return solution;
}

}  // namespace scenalloc::cvar

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace scenalloc::cvar {

enum class Relation { LE, GE, EQ };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// minimize c^T x  subject to  A x {<=,>=,=} b,  x >= 0
struct LpProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    std::vector<Relation> relations;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;  // structural variables only
    double objective = 0.0;
    int iterations = 0;
};

// Dense two-phase revised simplex. Dantzig pricing with a Bland's-rule
// fallback after a run of degenerate pivots, so cycling terminates.
LpSolution solve_lp(const LpProblem& problem, int max_iterations = 200000);

// Pluggable solver hook: anything with this shape can replace the bundled
// simplex in the allocation routines.
using LpSolverFn = std::function<LpSolution(const LpProblem&)>;

}  // namespace scenalloc::cvar

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "csmooth/constraints.hpp"

namespace csmooth {

struct QpOptions {
    double tol_primal = 1e-9;
    double tol_mult = 1e-10;
    long max_iterations = 0;  // 0 means 50 * (dim + rows)
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd multipliers;  // full length, zero off the active set
    std::vector<int> active;      // final working set, ascending
    long iterations = 0;
};

/// Primal active-set method for the strictly convex QP
///
///     minimize (1/2) x^T H x + g0^T x   subject to  G x >= h
///
/// parameterized by the inverse Hessian scale M = 2 H^{-1} ... i.e. H = 2 M^{-1},
/// and by `center` = the unconstrained minimizer -H^{-1} g0. Each working-set
/// subproblem is solved through M, so the Hessian itself is never formed.
///
/// `start` must be feasible up to tol_primal. Blocking constraints enter by
/// the smallest-index rule among ties; constraints leave by the most
/// negative multiplier. Throws SolverError when the iteration limit is hit.
QpResult solve_qp_active_set(const Eigen::MatrixXd& hess_inv, const Eigen::VectorXd& center,
                             const LinearInequalities& li, const Eigen::VectorXd& start,
                             const QpOptions& opts = {});

/// Feasibility-only solve: the nearest point to the origin in {G c >= h}.
/// Starts from li.witness (or 0 when feasible); throws InfeasibleError when
/// no starting point is available or the witness is itself infeasible.
Eigen::VectorXd feasibility_solve(const LinearInequalities& li, Eigen::Index dim);

/// Euclidean projection of `target` onto {G c >= h} from a feasible start.
Eigen::VectorXd project_onto(const LinearInequalities& li, const Eigen::VectorXd& target,
                             const Eigen::VectorXd& start);

}  // namespace csmooth

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "csmooth/constraints.hpp"
#include "csmooth/kernel.hpp"
#include "csmooth/mesh.hpp"
#include "csmooth/metric.hpp"

namespace csmooth {

/// Observations (x_i, y_i) on [0,1] with known noise variance.
struct DataSet {
    std::vector<double> xs;
    std::vector<double> ys;
    double noise_var = 1.0;

    DataSet(std::vector<double> xs, std::vector<double> ys, double noise_var);

    std::size_t size() const { return xs.size(); }
};

struct KktResiduals {
    /// Hessian-preconditioned gradient residual, relative to its own scale:
    /// the coefficient-space distance between the solution and the
    /// stationary point implied by the multipliers.
    double stationarity = 0.0;
    /// Worst constraint violation (coefficient units).
    double primal = 0.0;
    /// Worst |mu_i * slack_i| per unit multiplier.
    double complementarity = 0.0;
};

struct Solution {
    PiecewiseLinearFn u_hat;
    double objective = 0.0;
    Eigen::VectorXd multipliers;  // one per constraint row
    std::vector<int> active_set;
    KktResiduals kkt;
    long iterations = 0;
};

/// The discretized problem: minimize c^T Gamma^{-1} c + |S c - y|^2 / sigma^2
/// over {c : G c >= h}. The resolvent (Gamma^{-1} + S^T S / sigma^2)^{-1} is
/// precomputed by a Woodbury identity through the stored Cholesky factors,
/// so the inverse Gram matrix is never materialized.
class QPProblem {
public:
    QPProblem(const Kernel& k, const Mesh& mesh, DataSet data, const ConstraintSet& cs);
    QPProblem(const Kernel& k, const Mesh& mesh, DataSet data, LinearInequalities li);
    QPProblem(HnMetric metric, DataSet data, LinearInequalities li);

    const HnMetric& metric() const { return metric_; }
    const DataSet& data() const { return data_; }
    const LinearInequalities& ineq() const { return ineq_; }

    /// Node index of each observation (the 0/1 selector in compact form).
    const std::vector<Eigen::Index>& selector() const { return sites_; }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(metric_.mesh.nodes().size()); }

    /// Inverse of half the Hessian; also the posterior covariance of the
    /// node values.
    const Eigen::MatrixXd& hess_inv() const { return hess_inv_; }

    /// The unconstrained minimizer (posterior mean at the nodes).
    const Eigen::VectorXd& unconstrained() const { return unconstrained_; }

    /// Gradient of the objective at c.
    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const;

    Eigen::VectorXd apply_selector(const Eigen::VectorXd& c) const;
    Eigen::VectorXd scatter_selector(const Eigen::VectorXd& r) const;

private:
    void init();

    HnMetric metric_;
    DataSet data_;
    LinearInequalities ineq_;
    std::vector<Eigen::Index> sites_;
    Eigen::MatrixXd hess_inv_;
    Eigen::VectorXd unconstrained_;
};

/// J_N(c): the discrete objective.
double objective_jn(const QPProblem& p, const Eigen::VectorXd& c);

/// J(h) for h = sum_k alpha_k K(., s_k): alpha^T K(s,s) alpha plus the data
/// misfit. The only place the continuous objective is computable exactly.
double objective_j_on_span(const Kernel& k, const std::vector<double>& sites,
                           const Eigen::VectorXd& alpha, const DataSet& data);

/// The unconstrained smoother u(t) = y (K + sigma^2 I)^{-1} k(t) at each
/// query point.
Eigen::VectorXd solve_closed_form(const Kernel& k, const DataSet& data,
                                  const std::vector<double>& query);

/// Minimizes the objective with the constraints ignored.
Solution solve_unconstrained(const QPProblem& p);

/// Minimizes the objective over {G c >= h} by a primal active-set method,
/// warm-started from the unconstrained solution projected to feasibility.
/// The returned certificate always satisfies the declared tolerances.
/// `warm_start` overrides the starting point (it must be feasible).
Solution solve_constrained(const QPProblem& p,
                           const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Independent verifier: enumerates all active subsets (at most 12 rows),
/// solves each equality-constrained system, and keeps the KKT-consistent
/// candidate. Must agree with solve_constrained.
Solution brute_oracle(const QPProblem& p);

}  // namespace csmooth

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "csmooth/constraints.hpp"
#include "csmooth/kernel.hpp"
#include "csmooth/mesh.hpp"
#include "csmooth/solver.hpp"

namespace csmooth {

/// Gaussian posterior of the node values given the data (no constraints):
/// mean = Gamma S^T (S Gamma S^T + sigma^2 I)^{-1} y and
/// cov  = Gamma - Gamma S^T (S Gamma S^T + sigma^2 I)^{-1} S Gamma.
struct NodePosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

NodePosterior node_posterior(const Kernel& k, const Mesh& m, const DataSet& data);

/// Unnormalized log posterior density: -J_N(c)/2 on the feasible set,
/// -infinity outside. `feas_tol` defaults to the constraint tolerance so
/// that solver output is always inside.
double log_posterior_unnorm(const QPProblem& p, const Eigen::VectorXd& c,
                            double feas_tol = 1e-9);

struct MapCheckReport {
    long trials = 0;
    std::vector<long> violation_trials;  // empty when the MAP check passes
    double max_shortfall = 0.0;          // largest J_N(u_hat) - J_N(c') observed
    double min_margin = 0.0;             // smallest J_N(c') - J_N(u_hat)

    bool passed() const { return violation_trials.empty(); }
};

/// Verifies that the constrained minimizer is the posterior mode: random
/// perturbations of u_hat within `radius` (per coordinate), projected back
/// to feasibility, must never beat its posterior density. Violations beyond
/// a 1e-9 relative slack are reported.
MapCheckReport map_equals_qp(const QPProblem& p, long trials, double radius, std::uint64_t seed);
MapCheckReport map_equals_qp(const QPProblem& p, const Solution& sol, long trials, double radius,
                             std::uint64_t seed);

struct SampleBatch {
    std::vector<Eigen::VectorXd> draws;
    long attempted = 0;
    long accepted = 0;
    std::uint64_t seed = 0;

    double acceptance_rate() const {
        return attempted > 0 ? static_cast<double>(accepted) / static_cast<double>(attempted) : 0.0;
    }
};

/// Draws from the truncated node posterior by exact rejection: i.i.d.
/// Gaussian proposals filtered through the constraints (zero tolerance).
/// Deterministic given the seed. Throws LowAcceptanceError if max_attempts
/// runs out before `count` draws are accepted.
SampleBatch rejection_sample(const NodePosterior& np, const LinearInequalities& li, long count,
                             long max_attempts, std::uint64_t seed);

/// Sharded variant: splits the budget over `threads` workers with derived
/// per-shard seeds and merges in shard order, so the result is deterministic
/// for a fixed (seed, threads) pair. threads = 1 matches rejection_sample.
SampleBatch rejection_sample_sharded(const NodePosterior& np, const LinearInequalities& li,
                                     long count, long max_attempts, std::uint64_t seed,
                                     int threads);

}  // namespace csmooth

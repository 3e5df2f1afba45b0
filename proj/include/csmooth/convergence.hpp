#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "csmooth/constraints.hpp"
#include "csmooth/kernel.hpp"
#include "csmooth/solver.hpp"

namespace csmooth {

struct LevelRecord {
    int level = 0;
    Eigen::Index segments = 0;  // N: node count - 1
    Eigen::VectorXd coeffs;
    double objective = 0.0;
    std::optional<double> sup_gap_to_prev;  // grid sup-norm gap to the previous level
    std::optional<double> j_gap_to_prev;    // |J_N - J_{N-1}|
    std::optional<double> reference_objective;  // J_N(pi_N(g)) when a reference is supplied
    double wall_time_s = 0.0;
};

struct RefinementReport {
    int eval_grid = 0;
    std::vector<LevelRecord> levels;
};

/// Solves the constrained problem on nested dyadic meshes (levels
/// 1..max_level) and records per-level objectives and inter-level sup-norm
/// gaps on a shared uniform grid. When `reference_g` is a feasible function,
/// J_N of its interpolant is recorded per level (the objective of the
/// solution never exceeds it). Throws when a gap comes out non-finite or the
/// finest mesh would exceed ~2^11 nodes.
RefinementReport run_refinement(const Kernel& k, const DataSet& data, const ConstraintSet& cs,
                                int max_level, int eval_grid,
                                const std::function<double(double)>& reference_g = nullptr);

/// The discrete-metric distance |pi_N(g) - u_hat_N| at one level. The
/// interpolated reference must be feasible.
double projection_gap(const Kernel& k, const DataSet& data, const ConstraintSet& cs, int level,
                      const std::function<double(double)>& reference_g);

}  // namespace csmooth

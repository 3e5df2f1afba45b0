#include "csmooth/convergence.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

constexpr std::size_t kMaxNodes = 2100;  // dense Cholesky budget

Solution solve_level(const QPProblem& p, const ConstraintSet& cs) {
    return cs.empty() ? solve_unconstrained(p) : solve_constrained(p);
}

}  // namespace

RefinementReport run_refinement(const Kernel& k, const DataSet& data, const ConstraintSet& cs,
                                int max_level, int eval_grid,
                                const std::function<double(double)>& reference_g) {
    if (max_level < 2) throw InvalidInput("run_refinement: max_level must be >= 2");
    if (eval_grid < 2) throw InvalidInput("run_refinement: eval_grid must be >= 2");

    {
        const Mesh base = Mesh::base(data.xs);
        const std::size_t finest = base.segment_count() * (1u << max_level) + 1;
        if (finest > kMaxNodes) {
            throw InvalidInput("run_refinement: level " + std::to_string(max_level) +
                               " needs " + std::to_string(finest) + " nodes (cap " +
                               std::to_string(kMaxNodes) + ")");
        }
    }

    RefinementReport report;
    report.eval_grid = eval_grid;

    std::vector<double> grid(static_cast<std::size_t>(eval_grid));
    for (int g = 0; g < eval_grid; ++g) {
        grid[static_cast<std::size_t>(g)] = static_cast<double>(g) / (eval_grid - 1);
    }

    Eigen::VectorXd prev_evals;
    double prev_objective = 0.0;
    for (int level = 1; level <= max_level; ++level) {
        const auto t0 = std::chrono::steady_clock::now();
        const Mesh mesh = Mesh::at_level(data.xs, level);
        const QPProblem problem(k, mesh, data, cs);

        Solution sol = [&] {
            try {
                return solve_level(problem, cs);
            } catch (const Error& e) {
                throw SolverError("level " + std::to_string(level) + ": " + e.what());
            }
        }();

        LevelRecord rec;
        rec.level = level;
        rec.segments = static_cast<Eigen::Index>(mesh.segment_count());
        rec.coeffs = sol.u_hat.coeffs();
        rec.objective = sol.objective;

        Eigen::VectorXd evals(eval_grid);
        for (int g = 0; g < eval_grid; ++g) {
            evals[g] = sol.u_hat(grid[static_cast<std::size_t>(g)]);
        }
        if (prev_evals.size() > 0) {
            const double sup_gap = (evals - prev_evals).cwiseAbs().maxCoeff();
            const double j_gap = std::abs(rec.objective - prev_objective);
            if (!std::isfinite(sup_gap) || !std::isfinite(j_gap)) {
                throw SolverError("level " + std::to_string(level) +
                                  ": non-finite inter-level gap");
            }
            rec.sup_gap_to_prev = sup_gap;
            rec.j_gap_to_prev = j_gap;
        }

        if (reference_g) {
            const PiecewiseLinearFn ref = interpolate(mesh, reference_g);
            if (!is_feasible(problem.ineq(), ref.coeffs(), 1e-9)) {
                throw InfeasibleError("run_refinement: reference function is infeasible at level " +
                                      std::to_string(level));
            }
            rec.reference_objective = objective_jn(problem, ref.coeffs());
        }

        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        prev_evals = std::move(evals);
        prev_objective = rec.objective;
        report.levels.push_back(std::move(rec));
    }
    return report;
}

double projection_gap(const Kernel& k, const DataSet& data, const ConstraintSet& cs, int level,
                      const std::function<double(double)>& reference_g) {
    if (!reference_g) throw InvalidInput("projection_gap: reference function required");
    const Mesh mesh = Mesh::at_level(data.xs, level);
    const QPProblem problem(k, mesh, data, cs);
    const PiecewiseLinearFn ref = interpolate(mesh, reference_g);
    if (!is_feasible(problem.ineq(), ref.coeffs(), 1e-9)) {
        throw InfeasibleError("projection_gap: reference function is infeasible on this mesh");
    }
    const Solution sol = solve_level(problem, cs);
    const Eigen::VectorXd diff = ref.coeffs() - sol.u_hat.coeffs();
    const double gap_sq = diff.dot(problem.metric().gram.solve(diff));
    return std::sqrt(std::max(0.0, gap_sq));
}

}  // namespace csmooth

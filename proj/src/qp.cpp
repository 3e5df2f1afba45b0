#include "csmooth/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

using SparseRow = std::vector<std::pair<Eigen::Index, double>>;

std::vector<SparseRow> extract_rows(const LinearInequalities& li) {
    std::vector<SparseRow> rows(static_cast<std::size_t>(li.rows()));
    for (Eigen::Index i = 0; i < li.rows(); ++i) {
        for (Eigen::Index j = 0; j < li.cols(); ++j) {
            const double v = li.G(i, j);
            if (v != 0.0) rows[static_cast<std::size_t>(i)].emplace_back(j, v);
        }
    }
    return rows;
}

double sparse_dot(const SparseRow& row, const Eigen::VectorXd& v) {
    double s = 0.0;
    for (const auto& [j, g] : row) s += g * v[j];
    return s;
}

// Primal active-set iteration with an incrementally maintained Cholesky
// factor of B = G_W M G_W^T (rows appended on constraint entry, Givens
// re-triangularization on exit), so each step costs O(|W|^2), not O(|W|^3).
class ActiveSetSolver {
public:
    ActiveSetSolver(const Eigen::MatrixXd& hess_inv, const Eigen::VectorXd& center,
                    const LinearInequalities& li, const QpOptions& opts)
        : M_(hess_inv),
          center_(center),
          li_(li),
          rows_(extract_rows(li)),
          opts_(opts),
          in_set_(static_cast<std::size_t>(li.rows()), 0),
          q_(static_cast<std::size_t>(li.rows())),
          have_q_(static_cast<std::size_t>(li.rows()), 0),
          g_center_(static_cast<std::size_t>(li.rows()), 0.0),
          have_g_center_(static_cast<std::size_t>(li.rows()), 0) {
        row_scale_.reserve(rows_.size());
        for (const auto& row : rows_) {
            double s = 0.0;
            for (const auto& [j, g] : row) s = std::max(s, std::abs(g));
            row_scale_.push_back(std::max(s, 1.0));
        }
        max_iter_ = opts.max_iterations > 0
                        ? opts.max_iterations
                        : 50 * (static_cast<long>(center.size()) + static_cast<long>(li.rows()));
    }

    QpResult run(const Eigen::VectorXd& start) {
        if ((li_.rows() > 0) && !is_feasible(li_, start, 10.0 * opts_.tol_primal)) {
            throw SolverError("active-set solver started from an infeasible point");
        }
        x_ = start;
        seed_working_set();

        QpResult out;
        long iter = 0;
        while (true) {
            if (++iter > max_iter_) {
                const double primal =
                    li_.rows() ? std::max(0.0, (li_.h - li_.G * x_).maxCoeff()) : 0.0;
                throw SolverError("active-set solver hit the iteration limit (" +
                                      std::to_string(max_iter_) + ")",
                                  std::vector<double>(x_.data(), x_.data() + x_.size()), primal,
                                  std::numeric_limits<double>::quiet_NaN());
            }

            Eigen::VectorXd mu;
            const Eigen::VectorXd x_eq = equality_solution(mu);
            const Eigen::VectorXd p = x_eq - x_;
            const double step_scale = std::max({1.0, x_.cwiseAbs().maxCoeff(),
                                                x_eq.cwiseAbs().maxCoeff()});

            if (p.cwiseAbs().maxCoeff() <= 1e-13 * step_scale) {
                int worst = -1;
                double worst_mu = -opts_.tol_mult;
                for (std::size_t a = 0; a < wset_.size(); ++a) {
                    if (mu[static_cast<Eigen::Index>(a)] < worst_mu) {
                        worst_mu = mu[static_cast<Eigen::Index>(a)];
                        worst = static_cast<int>(a);
                    }
                }
                if (worst < 0) {
                    out.x = x_eq;
                    out.multipliers = Eigen::VectorXd::Zero(li_.rows());
                    for (std::size_t a = 0; a < wset_.size(); ++a) {
                        out.multipliers[wset_[a]] =
                            std::max(0.0, mu[static_cast<Eigen::Index>(a)]);
                    }
                    out.active.assign(wset_.begin(), wset_.end());
                    std::sort(out.active.begin(), out.active.end());
                    out.iterations = iter;
                    return out;
                }
                remove_at(static_cast<std::size_t>(worst));
                continue;
            }

            // Ratio test over rows outside the working set; smallest index
            // wins ties so runs are reproducible. A row only blocks when the
            // full step would genuinely violate it, which keeps roundoff
            // noise from smuggling dependent rows into the working set.
            double alpha = 1.0;
            int blocker = -1;
            for (Eigen::Index i = 0; i < li_.rows(); ++i) {
                if (in_set_[static_cast<std::size_t>(i)]) continue;
                const auto& row = rows_[static_cast<std::size_t>(i)];
                const double r = sparse_dot(row, x_) - li_.h[i];
                const double d = sparse_dot(row, p);
                const double block_tol =
                    1e-12 * row_scale_[static_cast<std::size_t>(i)] * step_scale;
                if (r + d >= -block_tol) continue;  // full step keeps the row feasible
                const double bound = std::max(0.0, -r / d);
                if (bound < alpha) {
                    alpha = bound;
                    blocker = static_cast<int>(i);
                }
            }

            x_ += alpha * p;
            if (blocker >= 0) {
                if (!add_row(blocker)) {
                    throw SolverError("active-set blocking row is numerically dependent");
                }
            } else {
                x_ = x_eq;
            }
        }
    }

private:
    const Eigen::VectorXd& q_col(int i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!have_q_[idx]) {
            Eigen::VectorXd q = Eigen::VectorXd::Zero(center_.size());
            for (const auto& [j, g] : rows_[idx]) q += g * M_.col(j);
            q_[idx] = std::move(q);
            have_q_[idx] = 1;
        }
        return q_[idx];
    }

    double g_dot_center(int i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!have_g_center_[idx]) {
            g_center_[idx] = sparse_dot(rows_[idx], center_);
            have_g_center_[idx] = 1;
        }
        return g_center_[idx];
    }

    // Appends row i to the working set, extending the Cholesky factor by one
    // row. Returns false (set unchanged) when the row is numerically
    // dependent on the current set.
    bool add_row(int i) {
        const auto k = static_cast<Eigen::Index>(wset_.size());
        if (L_.rows() <= k) {
            const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * (k + 1));
            L_.conservativeResize(cap, cap);
        }
        const double d = sparse_dot(rows_[static_cast<std::size_t>(i)], q_col(i));
        double fresh = d;
        if (k > 0) {
            Eigen::VectorXd v(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                v[a] = sparse_dot(rows_[static_cast<std::size_t>(wset_[static_cast<std::size_t>(a)])],
                                  q_col(i));
            }
            const Eigen::VectorXd w =
                L_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(v);
            fresh = d - w.squaredNorm();
            if (fresh <= 1e-12 * std::max(d, 1e-300)) return false;
            L_.block(k, 0, 1, k) = w.transpose();
        } else if (fresh <= 0.0) {
            return false;
        }
        L_(k, k) = std::sqrt(fresh);
        wset_.push_back(i);
        in_set_[static_cast<std::size_t>(i)] = 1;
        return true;
    }

    // Deletes position pos: drops the factor row and restores triangularity
    // of the trailing block with Givens rotations on column pairs.
    void remove_at(std::size_t pos) {
        const std::size_t k = wset_.size();
        in_set_[static_cast<std::size_t>(wset_[pos])] = 0;
        wset_.erase(wset_.begin() + static_cast<std::ptrdiff_t>(pos));

        for (std::size_t r = pos; r + 1 < k; ++r) {
            L_.row(static_cast<Eigen::Index>(r)).head(static_cast<Eigen::Index>(k)) =
                L_.row(static_cast<Eigen::Index>(r) + 1).head(static_cast<Eigen::Index>(k));
        }
        const auto kk = static_cast<Eigen::Index>(k) - 1;
        for (Eigen::Index j = static_cast<Eigen::Index>(pos); j < kk; ++j) {
            const double a = L_(j, j);
            const double b = L_(j, j + 1);
            if (b == 0.0) continue;
            const double r = std::hypot(a, b);
            const double c = a / r;
            const double s = b / r;
            for (Eigen::Index rr = j; rr < kk; ++rr) {
                const double x = L_(rr, j);
                const double y = L_(rr, j + 1);
                L_(rr, j) = c * x + s * y;
                L_(rr, j + 1) = c * y - s * x;
            }
        }
    }

    // Solves the working-set subproblem through the maintained factor:
    // (G_W M G_W^T) mu = 2 (h_W - G_W center), x = center + (1/2) M G_W^T mu.
    Eigen::VectorXd equality_solution(Eigen::VectorXd& mu) {
        const auto k = static_cast<Eigen::Index>(wset_.size());
        if (k == 0) {
            mu.resize(0);
            return center_;
        }
        Eigen::VectorXd rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const int i = wset_[static_cast<std::size_t>(a)];
            rhs[a] = 2.0 * (li_.h[i] - g_dot_center(i));
        }
        const auto L = L_.topLeftCorner(k, k);
        mu = L.triangularView<Eigen::Lower>().solve(rhs);
        mu = L.transpose().triangularView<Eigen::Upper>().solve(mu);
        Eigen::VectorXd x = center_;
        for (Eigen::Index a = 0; a < k; ++a) {
            x += 0.5 * mu[a] * q_col(wset_[static_cast<std::size_t>(a)]);
        }
        return x;
    }

    // Constraints active at the start enter the working set in index order;
    // rows that would make the factor rank deficient are skipped.
    void seed_working_set() {
        const double act_tol = std::max(opts_.tol_primal, 1e-12);
        for (Eigen::Index i = 0; i < li_.rows(); ++i) {
            const double r = sparse_dot(rows_[static_cast<std::size_t>(i)], x_) - li_.h[i];
            if (std::abs(r) > act_tol * row_scale_[static_cast<std::size_t>(i)]) continue;
            add_row(static_cast<int>(i));
        }
    }

    const Eigen::MatrixXd& M_;
    const Eigen::VectorXd& center_;
    const LinearInequalities& li_;
    std::vector<SparseRow> rows_;
    std::vector<double> row_scale_;
    QpOptions opts_;
    long max_iter_ = 0;

    Eigen::VectorXd x_;
    std::vector<int> wset_;        // factor order
    std::vector<char> in_set_;     // membership flags
    Eigen::MatrixXd L_;            // Cholesky factor of G_W M G_W^T
    std::vector<Eigen::VectorXd> q_;
    std::vector<char> have_q_;
    std::vector<double> g_center_;
    std::vector<char> have_g_center_;
};

}  // namespace

QpResult solve_qp_active_set(const Eigen::MatrixXd& hess_inv, const Eigen::VectorXd& center,
                             const LinearInequalities& li, const Eigen::VectorXd& start,
                             const QpOptions& opts) {
    if (center.size() != hess_inv.rows() || hess_inv.rows() != hess_inv.cols()) {
        throw InvalidInput("solve_qp_active_set: inconsistent Hessian/center dimensions");
    }
    if (li.rows() > 0 && li.cols() != center.size()) {
        throw InvalidInput("solve_qp_active_set: constraint dimension mismatch");
    }
    if (start.size() != center.size()) {
        throw InvalidInput("solve_qp_active_set: start dimension mismatch");
    }
    ActiveSetSolver solver(hess_inv, center, li, opts);
    return solver.run(start);
}

Eigen::VectorXd feasibility_solve(const LinearInequalities& li, Eigen::Index dim) {
    if (li.rows() == 0) return Eigen::VectorXd::Zero(dim);
    if (li.cols() != dim) {
        throw InvalidInput("feasibility_solve: dimension mismatch");
    }

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    if (is_feasible(li, zero, 0.0)) return zero;  // already the minimum-norm point

    Eigen::VectorXd start;
    if (li.witness && li.witness->size() == dim && is_feasible(li, *li.witness, 1e-12)) {
        start = *li.witness;
    } else if (li.witness) {
        throw InfeasibleError("constraint system is infeasible: the constructed witness violates it");
    } else {
        throw InfeasibleError("no feasible starting point available for the feasibility phase");
    }

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
    return solve_qp_active_set(identity, zero, li, start).x;
}

Eigen::VectorXd project_onto(const LinearInequalities& li, const Eigen::VectorXd& target,
                             const Eigen::VectorXd& start) {
    if (li.rows() == 0) return target;
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(target.size(), target.size());
    return solve_qp_active_set(identity, target, li, start).x;
}

}  // namespace csmooth

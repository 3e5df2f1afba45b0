#include "csmooth/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "csmooth/errors.hpp"
#include "csmooth/qp.hpp"

namespace csmooth {

namespace {

constexpr double kTolPrimal = 1e-9;
constexpr double kTolStationarity = 1e-8;
constexpr double kTolComplementarity = 1e-9;
constexpr double kTolMultiplier = 1e-10;

KktResiduals certificate(const QPProblem& p, const Eigen::VectorXd& c,
                         const Eigen::VectorXd& multipliers) {
    // Stationarity is measured through the inverse Hessian: the residual of
    //   2 (c - center) = M G^T mu
    // which is the coefficient-space distance to the stationary point that
    // matches the multipliers. The raw gradient residual would route through
    // Gamma^{-1} and drown in eps * cond(Gamma) evaluation noise; this form
    // is algebraically the same equation and numerically computable.
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(p.dim());
    if (p.ineq().rows() > 0) {
        pull = p.hess_inv() * (p.ineq().G.transpose() * multipliers);
    }
    const Eigen::VectorXd drift = 2.0 * (c - p.unconstrained());

    KktResiduals kkt;
    const double scale =
        std::max({1.0, drift.cwiseAbs().maxCoeff(), pull.cwiseAbs().maxCoeff()});
    kkt.stationarity = (drift - pull).cwiseAbs().maxCoeff() / scale;
    if (p.ineq().rows() > 0) {
        const Eigen::VectorXd slack = p.ineq().G * c - p.ineq().h;
        kkt.primal = std::max(0.0, -slack.minCoeff());
        // scaled per unit multiplier, so the residual stays in slack units
        // when small noise variances blow the gradient up
        const double mu_scale = std::max(1.0, multipliers.cwiseAbs().maxCoeff());
        kkt.complementarity = (multipliers.array() * slack.array()).abs().maxCoeff() / mu_scale;
    }
    return kkt;
}

void require_certificate(const KktResiduals& kkt, const Eigen::VectorXd& multipliers,
                         const char* where) {
    const double mult_min = multipliers.size() ? multipliers.minCoeff() : 0.0;
    if (kkt.primal > kTolPrimal || kkt.stationarity > kTolStationarity ||
        kkt.complementarity > kTolComplementarity || mult_min < -kTolMultiplier) {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "%s: KKT certificate out of tolerance (primal %.3e, stationarity %.3e, "
                      "complementarity %.3e, min multiplier %.3e)",
                      where, kkt.primal, kkt.stationarity, kkt.complementarity, mult_min);
        throw SolverError(buf);
    }
}

Solution make_solution(const QPProblem& p, const Eigen::VectorXd& c,
                       const Eigen::VectorXd& multipliers, std::vector<int> active,
                       long iterations, const char* where) {
    Solution s{PiecewiseLinearFn(p.metric().mesh, c),
               objective_jn(p, c),
               multipliers,
               std::move(active),
               certificate(p, c, multipliers),
               iterations};
    require_certificate(s.kkt, multipliers, where);
    return s;
}

}  // namespace

DataSet::DataSet(std::vector<double> xs_in, std::vector<double> ys_in, double noise_var_in)
    : xs(std::move(xs_in)), ys(std::move(ys_in)), noise_var(noise_var_in) {
    if (xs.empty()) throw InvalidInput("data set must contain at least one observation");
    if (xs.size() != ys.size()) {
        throw InvalidInput("data set has " + std::to_string(xs.size()) + " x values but " +
                           std::to_string(ys.size()) + " y values");
    }
    if (!(noise_var > 0.0)) {
        throw InvalidInput("noise variance must be > 0, got " + std::to_string(noise_var));
    }
    for (double x : xs) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw InvalidInput("data site " + std::to_string(x) + " is outside [0,1]");
        }
    }
}

QPProblem::QPProblem(const Kernel& k, const Mesh& mesh, DataSet data, const ConstraintSet& cs)
    : metric_(make_metric(k, mesh)), data_(std::move(data)), ineq_(compile(cs, mesh)) {
    init();
}

QPProblem::QPProblem(const Kernel& k, const Mesh& mesh, DataSet data, LinearInequalities li)
    : QPProblem(make_metric(k, mesh), std::move(data), std::move(li)) {}

QPProblem::QPProblem(HnMetric metric, DataSet data, LinearInequalities li)
    : metric_(std::move(metric)), data_(std::move(data)), ineq_(std::move(li)) {
    init();
}

void QPProblem::init() {
    if (ineq_.rows() == 0) {
        ineq_ = LinearInequalities::empty(dim());
    } else if (ineq_.cols() != dim()) {
        throw InvalidInput("constraint matrix has " + std::to_string(ineq_.cols()) +
                           " columns for " + std::to_string(dim()) + " nodes");
    }

    sites_.clear();
    for (double x : data_.xs) {
        sites_.push_back(static_cast<Eigen::Index>(metric_.mesh.node_index_of(x)));
    }

    // Woodbury: (Gamma^{-1} + S^T S / s2)^{-1} = Gamma - A (B)^{-1} A^T with
    // A = Gamma S^T and B = S Gamma S^T + s2 I.
    const auto n = static_cast<Eigen::Index>(data_.size());
    const Eigen::MatrixXd& gamma = metric_.gram.values();
    Eigen::MatrixXd A(dim(), n);
    for (Eigen::Index i = 0; i < n; ++i) A.col(i) = gamma.col(sites_[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            B(i, j) = gamma(sites_[static_cast<std::size_t>(i)], sites_[static_cast<std::size_t>(j)]);
        }
        B(i, i) += data_.noise_var;
    }
    Eigen::LLT<Eigen::MatrixXd> bllt(B);
    if (bllt.info() != Eigen::Success) {
        throw FactorizationError("data-site system S Gamma S^T + sigma^2 I failed to factorize");
    }
    hess_inv_ = gamma - A * bllt.solve(A.transpose());
    hess_inv_ = 0.5 * (hess_inv_ + hess_inv_.transpose()).eval();

    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data_.ys.data(), n);
    unconstrained_ = A * bllt.solve(y);
}

Eigen::VectorXd QPProblem::apply_selector(const Eigen::VectorXd& c) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(sites_.size()));
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = c[sites_[i]];
    }
    return out;
}

Eigen::VectorXd QPProblem::scatter_selector(const Eigen::VectorXd& r) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        out[sites_[i]] += r[static_cast<Eigen::Index>(i)];
    }
    return out;
}

Eigen::VectorXd QPProblem::gradient(const Eigen::VectorXd& c) const {
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data_.ys.data(),
                                                                static_cast<Eigen::Index>(data_.size()));
    return 2.0 * metric_.gram.solve(c) +
           (2.0 / data_.noise_var) * scatter_selector(apply_selector(c) - y);
}

double objective_jn(const QPProblem& p, const Eigen::VectorXd& c) {
    if (c.size() != p.dim()) {
        throw InvalidInput("objective_jn: coefficient dimension mismatch");
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        p.data().ys.data(), static_cast<Eigen::Index>(p.data().size()));
    const Eigen::VectorXd misfit = p.apply_selector(c) - y;
    return c.dot(p.metric().gram.solve(c)) + misfit.squaredNorm() / p.data().noise_var;
}

double objective_j_on_span(const Kernel& k, const std::vector<double>& sites,
                           const Eigen::VectorXd& alpha, const DataSet& data) {
    const auto m = static_cast<Eigen::Index>(sites.size());
    if (alpha.size() != m) throw InvalidInput("objective_j_on_span: alpha/site size mismatch");
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        if (!(sites[static_cast<std::size_t>(i)] < sites[static_cast<std::size_t>(i) + 1])) {
            throw InvalidInput("objective_j_on_span: sites must be strictly increasing");
        }
    }

    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            norm_sq += alpha[i] * alpha[j] *
                       eval_kernel(k, sites[static_cast<std::size_t>(i)],
                                   sites[static_cast<std::size_t>(j)]);
        }
    }

    double misfit = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double h = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            h += alpha[j] * eval_kernel(k, data.xs[i], sites[static_cast<std::size_t>(j)]);
        }
        const double r = h - data.ys[i];
        misfit += r * r;
    }
    return norm_sq + misfit / data.noise_var;
}

Eigen::VectorXd solve_closed_form(const Kernel& k, const DataSet& data,
                                  const std::vector<double>& query) {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd kk(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = eval_kernel(k, data.xs[static_cast<std::size_t>(i)],
                                         data.xs[static_cast<std::size_t>(j)]);
            kk(i, j) = v;
            kk(j, i) = v;
        }
        kk(i, i) += data.noise_var;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(kk);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError("closed form: K + sigma^2 I failed to factorize");
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.ys.data(), n);
    const Eigen::VectorXd w = llt.solve(y);

    Eigen::VectorXd out(static_cast<Eigen::Index>(query.size()));
    for (std::size_t q = 0; q < query.size(); ++q) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            v += w[i] * eval_kernel(k, data.xs[static_cast<std::size_t>(i)], query[q]);
        }
        out[static_cast<Eigen::Index>(q)] = v;
    }
    return out;
}

Solution solve_unconstrained(const QPProblem& p) {
    Solution s{PiecewiseLinearFn(p.metric().mesh, p.unconstrained()),
               objective_jn(p, p.unconstrained()),
               Eigen::VectorXd::Zero(p.ineq().rows()),
               {},
               {},
               0};
    s.kkt = certificate(p, p.unconstrained(), s.multipliers);
    return s;
}

Solution solve_constrained(const QPProblem& p, const std::optional<Eigen::VectorXd>& warm_start) {
    const LinearInequalities& li = p.ineq();
    if (li.rows() == 0) {
        return make_solution(p, p.unconstrained(), Eigen::VectorXd::Zero(0), {}, 0,
                             "solve_constrained");
    }

    // (H1) gate: the feasibility-only solve throws InfeasibleError when the
    // constraint system is empty of feasible points.
    const Eigen::VectorXd feasible_point = feasibility_solve(li, p.dim());

    Eigen::VectorXd start;
    if (warm_start) {
        if (!is_feasible(li, *warm_start, kTolPrimal)) {
            throw InvalidInput("solve_constrained: supplied warm start is infeasible");
        }
        start = *warm_start;
    } else if (is_feasible(li, p.unconstrained(), kTolPrimal)) {
        return make_solution(p, p.unconstrained(), Eigen::VectorXd::Zero(li.rows()), {}, 0,
                             "solve_constrained");
    } else {
        start = project_onto(li, p.unconstrained(), feasible_point);
    }

    QpOptions opts;
    opts.tol_primal = kTolPrimal;
    opts.tol_mult = kTolMultiplier;
    opts.max_iterations = 50 * (static_cast<long>(p.dim()) + static_cast<long>(li.rows()));
    const QpResult r = solve_qp_active_set(p.hess_inv(), p.unconstrained(), li, start, opts);

    return make_solution(p, r.x, r.multipliers, r.active, r.iterations, "solve_constrained");
}

Solution brute_oracle(const QPProblem& p) {
    const LinearInequalities& li = p.ineq();
    const auto m = static_cast<int>(li.rows());
    if (m > 12) {
        throw InvalidInput("brute_oracle supports at most 12 constraint rows, got " +
                           std::to_string(m));
    }

    const Eigen::MatrixXd& M = p.hess_inv();
    const Eigen::VectorXd& center = p.unconstrained();

    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_c;
    Eigen::VectorXd best_mu;
    std::vector<int> best_set;
    long tried = 0;

    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> set;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) set.push_back(i);
        }
        ++tried;

        const auto k = static_cast<Eigen::Index>(set.size());
        Eigen::VectorXd c;
        Eigen::VectorXd mu_set(k);
        if (k == 0) {
            c = center;
        } else {
            Eigen::MatrixXd GA(k, p.dim());
            Eigen::VectorXd hA(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                GA.row(a) = li.G.row(set[static_cast<std::size_t>(a)]);
                hA[a] = li.h[set[static_cast<std::size_t>(a)]];
            }
            const Eigen::MatrixXd B = GA * M * GA.transpose();
            Eigen::LLT<Eigen::MatrixXd> llt(B);
            if (llt.info() != Eigen::Success) continue;  // dependent subset
            mu_set = llt.solve(2.0 * (hA - GA * center));
            c = center + 0.5 * M * GA.transpose() * mu_set;
        }

        if (!is_feasible(li, c, kTolPrimal)) continue;
        if (k > 0 && mu_set.minCoeff() < -kTolMultiplier) continue;

        const double obj = objective_jn(p, c);
        if (obj < best_obj) {
            best_obj = obj;
            best_c = c;
            best_mu = Eigen::VectorXd::Zero(m);
            for (Eigen::Index a = 0; a < k; ++a) {
                best_mu[set[static_cast<std::size_t>(a)]] = std::max(0.0, mu_set[a]);
            }
            best_set = set;
        }
    }

    if (!best_c.size()) {
        throw SolverError("brute_oracle found no KKT-consistent active set");
    }
    return make_solution(p, best_c, best_mu, std::move(best_set), tried, "brute_oracle");
}

}  // namespace csmooth

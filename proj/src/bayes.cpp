#include "csmooth/bayes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "csmooth/errors.hpp"
#include "csmooth/qp.hpp"
#include "csmooth/rng.hpp"

namespace csmooth {

namespace {

/// Square root of the covariance via eigendecomposition. Conditioning can
/// leave tiny negative eigenvalues; anything above -1e-10 (relative) is
/// clipped to zero, anything below is a genuine error.
Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    if (es.info() != Eigen::Success) {
        throw FactorizationError("posterior covariance eigendecomposition failed");
    }
    const Eigen::VectorXd& evs = es.eigenvalues();
    const double scale = std::max(1.0, evs.cwiseAbs().maxCoeff());
    Eigen::VectorXd root(evs.size());
    for (Eigen::Index i = 0; i < evs.size(); ++i) {
        if (evs[i] < -1e-10 * scale) {
            throw FactorizationError("posterior covariance is not positive semidefinite (eigenvalue " +
                                     std::to_string(evs[i]) + ")");
        }
        root[i] = std::sqrt(std::max(0.0, evs[i]));
    }
    return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

NodePosterior node_posterior(const Kernel& k, const Mesh& m, const DataSet& data) {
    const QPProblem p(k, m, data, ConstraintSet{});
    return NodePosterior{p.unconstrained(), p.hess_inv()};
}

double log_posterior_unnorm(const QPProblem& p, const Eigen::VectorXd& c, double feas_tol) {
    if (!is_feasible(p.ineq(), c, feas_tol)) {
        return -std::numeric_limits<double>::infinity();
    }
    return -0.5 * objective_jn(p, c);
}

MapCheckReport map_equals_qp(const QPProblem& p, const Solution& sol, long trials, double radius,
                             std::uint64_t seed) {
    const Eigen::VectorXd& u_hat = sol.u_hat.coeffs();
    const double j_hat = sol.objective;
    const double slack = 1e-9 * std::max(1.0, std::abs(j_hat));

    MapCheckReport report;
    report.trials = trials;
    report.min_margin = std::numeric_limits<double>::infinity();

    Rng rng(seed);
    for (long t = 0; t < trials; ++t) {
        Eigen::VectorXd probe(u_hat.size());
        for (Eigen::Index i = 0; i < probe.size(); ++i) {
            probe[i] = u_hat[i] + rng.uniform(-radius, radius);
        }
        const Eigen::VectorXd c = project_onto(p.ineq(), probe, u_hat);
        const double margin = objective_jn(p, c) - j_hat;
        report.min_margin = std::min(report.min_margin, margin);
        if (margin < -slack) {
            report.violation_trials.push_back(t);
            report.max_shortfall = std::max(report.max_shortfall, -margin);
        }
    }
    return report;
}

MapCheckReport map_equals_qp(const QPProblem& p, long trials, double radius, std::uint64_t seed) {
    return map_equals_qp(p, solve_constrained(p), trials, radius, seed);
}

SampleBatch rejection_sample(const NodePosterior& np, const LinearInequalities& li, long count,
                             long max_attempts, std::uint64_t seed) {
    if (count < 1) throw InvalidInput("rejection_sample: count must be >= 1");
    if (li.rows() > 0 && li.cols() != np.mean.size()) {
        throw InvalidInput("rejection_sample: constraint dimension mismatch");
    }

    const Eigen::MatrixXd root = covariance_sqrt(np.cov);
    Rng rng(seed);

    SampleBatch batch;
    batch.seed = seed;
    batch.draws.reserve(static_cast<std::size_t>(count));
    Eigen::VectorXd z(np.mean.size());
    while (batch.accepted < count) {
        if (batch.attempted >= max_attempts) {
            throw LowAcceptanceError(
                "rejection sampler exhausted " + std::to_string(max_attempts) + " attempts with " +
                    std::to_string(batch.accepted) + " accepted (rate " +
                    std::to_string(batch.acceptance_rate()) +
                    "); constraints are too tight for exact rejection",
                batch.acceptance_rate(), batch.attempted, batch.accepted);
        }
        ++batch.attempted;
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        Eigen::VectorXd draw = np.mean + root * z;
        if (is_feasible(li, draw, 0.0)) {
            ++batch.accepted;
            batch.draws.push_back(std::move(draw));
        }
    }
    return batch;
}

SampleBatch rejection_sample_sharded(const NodePosterior& np, const LinearInequalities& li,
                                     long count, long max_attempts, std::uint64_t seed,
                                     int threads) {
    if (threads < 1) throw InvalidInput("rejection_sample_sharded: threads must be >= 1");
    if (threads == 1) return rejection_sample(np, li, count, max_attempts, seed);

    const long shards = threads;
    const long per_count = (count + shards - 1) / shards;
    const long per_budget = (max_attempts + shards - 1) / shards;

    std::vector<SampleBatch> results(static_cast<std::size_t>(shards));
    std::vector<std::string> failures(static_cast<std::size_t>(shards));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(shards));
    for (long s = 0; s < shards; ++s) {
        workers.emplace_back([&, s] {
            try {
                results[static_cast<std::size_t>(s)] = rejection_sample(
                    np, li, per_count, per_budget, derive_seed(seed, static_cast<std::uint64_t>(s)));
            } catch (const LowAcceptanceError& e) {
                results[static_cast<std::size_t>(s)].attempted = e.attempted;
                results[static_cast<std::size_t>(s)].accepted = e.accepted;
                failures[static_cast<std::size_t>(s)] = e.what();
            }
        });
    }
    for (auto& w : workers) w.join();

    SampleBatch merged;
    merged.seed = seed;
    for (const auto& r : results) {
        merged.attempted += r.attempted;
        merged.accepted += std::min<long>(r.accepted, static_cast<long>(r.draws.size()));
    }
    bool any_failure = false;
    for (const auto& f : failures) any_failure |= !f.empty();
    if (any_failure) {
        throw LowAcceptanceError("sharded rejection sampler fell short of the requested draws (rate " +
                                     std::to_string(merged.attempted > 0
                                                        ? static_cast<double>(merged.accepted) /
                                                              static_cast<double>(merged.attempted)
                                                        : 0.0) +
                                     ")",
                                 merged.attempted > 0 ? static_cast<double>(merged.accepted) /
                                                            static_cast<double>(merged.attempted)
                                                      : 0.0,
                                 merged.attempted, merged.accepted);
    }
    merged.accepted = 0;
    for (const auto& r : results) {
        for (const auto& d : r.draws) {
            if (merged.accepted == count) break;
            merged.draws.push_back(d);
            ++merged.accepted;
        }
    }
    return merged;
}

}  // namespace csmooth

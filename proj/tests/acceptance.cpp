// Acceptance suite: one gate per shipped guarantee, one printed line per
// gate. Every tolerance is pinned in code next to the check it guards.
//
// Exit status is the number of failed gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "csmooth/bayes.hpp"
#include "csmooth/constraints.hpp"
#include "csmooth/convergence.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/kernel.hpp"
#include "csmooth/mesh.hpp"
#include "csmooth/metric.hpp"
#include "csmooth/qp.hpp"
#include "csmooth/rng.hpp"
#include "csmooth/solver.hpp"

using namespace csmooth;

namespace {

struct Gate {
    std::string name;
    double budget_s = 0.0;
    std::function<std::string()> run;  // empty string on pass, reason on fail
};

Kernel family_kernel(int which, double lengthscale) {
    switch (which % 4) {
        case 0: return Kernel::squared_exponential(lengthscale);
        case 1: return Kernel::matern32(lengthscale);
        case 2: return Kernel::matern52(lengthscale);
        default: return Kernel::brownian_plus_one();
    }
}

std::string check_le(double value, double bound, const std::string& what) {
    if (value <= bound) return {};
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: %.3e > %.3e", what.c_str(), value, bound);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Unconstrained solver equals the closed-form smoother at the nodes.
// ---------------------------------------------------------------------------
std::string gate_closed_form() {
    Rng rng(101);
    for (int inst = 0; inst < 50; ++inst) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 10);
        std::vector<double> xs;
        std::vector<double> ys;
        double ymax = 0.0;
        for (int i = 0; i < n; ++i) {
            xs.push_back(rng.uniform(0.0, 1.0));
            ys.push_back(rng.uniform(-2.0, 2.0));
            ymax = std::max(ymax, std::abs(ys.back()));
        }
        if (ymax < 0.5) ys[0] = 1.0;
        const double noise = rng.uniform(0.1, 2.0);
        const Kernel k = family_kernel(inst, rng.uniform(0.1, 0.8));

        Mesh mesh = Mesh::base(xs);
        while (mesh.segment_count() * 2 <= 64 && (rng.next_u64() % 2) == 0) {
            mesh = mesh.refined();
        }

        const QPProblem p(k, mesh, DataSet(xs, ys, noise), ConstraintSet{});
        const Solution sol = solve_unconstrained(p);
        const Eigen::VectorXd ref = solve_closed_form(k, DataSet(xs, ys, noise), mesh.nodes());

        const double rel = (sol.u_hat.coeffs() - ref).cwiseAbs().maxCoeff() /
                           std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
        if (auto err = check_le(rel, 1e-8, "instance " + std::to_string(inst) + " rel gap");
            !err.empty()) {
            return err;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 2. The lift is an isometry: |rho(v)|_H^2 = |v|_{H_N}^2.
// ---------------------------------------------------------------------------
std::string gate_isometry() {
    Rng rng(202);
    const std::vector<std::vector<double>> bases = {{}, {0.37}, {0.2, 0.8}};
    int checked = 0;
    int inst = 0;
    while (checked < 500) {
        const Kernel k = family_kernel(inst, 0.25 + 0.1 * (inst % 3));
        const Mesh m = Mesh::at_level(bases[static_cast<std::size_t>(inst) % bases.size()],
                                      1 + inst % 4);
        const HnMetric metric = make_metric(k, m);
        const auto dim = static_cast<Eigen::Index>(m.nodes().size());
        for (int t = 0; t < 10 && checked < 500; ++t, ++checked) {
            // bounded-norm element: interpolant of a kernel-span function
            Eigen::VectorXd alpha(dim);
            for (Eigen::Index i = 0; i < dim; ++i) alpha[i] = rng.uniform(-1.0, 1.0);
            const PiecewiseLinearFn v(m, metric.gram.values() * alpha);
            const double lifted = h_norm_sq_of_lift(metric, v);
            const double direct = hn_norm_sq(metric, v);
            const double rel = std::abs(lifted - direct) / std::max(1e-300, std::abs(direct));
            if (auto err = check_le(rel, 1e-10, "check " + std::to_string(checked));
                !err.empty()) {
                return err;
            }
        }
        ++inst;
    }
    return {};
}

// ---------------------------------------------------------------------------
// 3. Interpolation is stable and its norm climbs monotonically to |h|_H^2.
// ---------------------------------------------------------------------------
std::string gate_norm_growth() {
    Rng rng(303);
    int fn_index = 0;
    // 16 smooth-kernel functions + 4 rough ones; the terminal-deficit bound
    // applies to the smooth families
    for (int which = 0; which < 4; ++which) {
        const int count = (which == 3) ? 4 : (which == 0 ? 6 : 5);
        const Kernel k = family_kernel(which, 0.3 + 0.05 * which);
        for (int rep = 0; rep < count; ++rep, ++fn_index) {
            std::vector<double> sites{rng.uniform(0.05, 0.3), rng.uniform(0.35, 0.65),
                                      rng.uniform(0.7, 0.95)};
            Eigen::VectorXd alpha(3);
            for (int i = 0; i < 3; ++i) alpha[i] = rng.uniform(-1.5, 1.5);

            double h_norm = 0.0;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    h_norm += alpha[i] * alpha[j] * eval_kernel(k, sites[static_cast<std::size_t>(i)],
                                                                sites[static_cast<std::size_t>(j)]);
                }
            }
            const auto h = [&](double x) {
                double v = 0.0;
                for (int i = 0; i < 3; ++i) {
                    v += alpha[i] * eval_kernel(k, x, sites[static_cast<std::size_t>(i)]);
                }
                return v;
            };

            double prev = -1.0;
            double terminal = 0.0;
            for (int level = 1; level <= 7; ++level) {
                const Mesh m = Mesh::at_level({}, level);
                const HnMetric metric = make_metric(k, m);
                const double pn = hn_norm_sq(metric, interpolate(m, h));
                if (pn < prev - 1e-9) {
                    return "function " + std::to_string(fn_index) + " level " +
                           std::to_string(level) + ": norm decreased";
                }
                if (pn > h_norm + 1e-9) {
                    return "function " + std::to_string(fn_index) + " level " +
                           std::to_string(level) + ": norm exceeds |h|^2";
                }
                prev = pn;
                terminal = pn;
            }
            if (which != 3) {  // smooth families
                const double deficit = (h_norm - terminal) / h_norm;
                if (auto err = check_le(deficit, 0.05,
                                        "function " + std::to_string(fn_index) +
                                            " terminal deficit");
                    !err.empty()) {
                    return err;
                }
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 4. The three-point strong-convexity identity of the discrete objective.
// ---------------------------------------------------------------------------
std::string gate_strong_convexity() {
    Rng rng(404);
    const Kernel kernels[] = {Kernel::matern32(0.4), Kernel::brownian_plus_one()};
    int done = 0;
    for (const Kernel& k : kernels) {
        const std::vector<double> xs{0.25, 0.6};
        const std::vector<double> ys{0.8, -0.3};
        const DataSet data(xs, ys, 0.7);
        const Mesh m = Mesh::at_level(xs, 2);
        const QPProblem p(k, m, data, ConstraintSet{});

        for (int t = 0; t < 500; ++t, ++done) {
            Eigen::VectorXd cu(p.dim());
            Eigen::VectorXd cv(p.dim());
            for (Eigen::Index i = 0; i < p.dim(); ++i) {
                cu[i] = rng.uniform(-2.0, 2.0);
                cv[i] = rng.uniform(-2.0, 2.0);
            }
            const double w = rng.uniform();
            const double ju = objective_jn(p, cu);
            const double jv = objective_jn(p, cv);
            const double jmix = objective_jn(p, w * cu + (1.0 - w) * cv);
            const Eigen::VectorXd dc = cu - cv;
            const double gap = dc.dot(p.metric().gram.solve(dc)) +
                               p.apply_selector(dc).squaredNorm() / data.noise_var;
            const double expected = w * ju + (1.0 - w) * jv - w * (1.0 - w) * gap;
            const double rel =
                std::abs(jmix - expected) / std::max({1.0, std::abs(ju), std::abs(jv)});
            if (auto err = check_le(rel, 1e-9, "triple " + std::to_string(done)); !err.empty()) {
                return err;
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 5. Active-set solver vs. exhaustive enumeration on small instances.
// ---------------------------------------------------------------------------
std::string gate_oracle_agreement() {
    Rng rng(505);
    for (int inst = 0; inst < 200; ++inst) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 2);
        std::vector<double> xs;
        std::vector<double> ys;
        for (int i = 0; i < n; ++i) {
            xs.push_back(rng.uniform(0.1, 0.9));
            ys.push_back(rng.uniform(-1.5, 1.5));
        }
        const Kernel k = family_kernel(inst, rng.uniform(0.15, 0.6));
        Mesh mesh = Mesh::at_level(xs, 1);
        if (mesh.segment_count() > 6) mesh = Mesh::at_level(xs, 0);

        ConstraintSet cs;
        switch (rng.next_u64() % 7) {
            case 0: cs.lower_bound(rng.uniform(-0.6, -0.1)); break;
            case 1: cs.upper_bound(rng.uniform(0.1, 0.6)); break;
            case 2: cs.monotone(MonotoneDirection::Increasing); break;
            case 3: cs.monotone(MonotoneDirection::Decreasing); break;
            case 4: cs.shape(ShapeCurvature::Convex); break;
            case 5: cs.shape(ShapeCurvature::Concave); break;
            default:
                if (mesh.segment_count() <= 5) {
                    cs.lower_bound(-0.5).upper_bound(0.5);
                } else {
                    cs.monotone(MonotoneDirection::Increasing);
                }
                break;
        }

        const QPProblem p(k, mesh, DataSet(xs, ys, rng.uniform(0.05, 1.5)), cs);
        const Solution fast = solve_constrained(p);
        const Solution slow = brute_oracle(p);

        const double gap = (fast.u_hat.coeffs() - slow.u_hat.coeffs()).cwiseAbs().maxCoeff();
        if (auto err = check_le(gap, 1e-7, "instance " + std::to_string(inst) + " coeff gap");
            !err.empty()) {
            return err;
        }
        for (const Solution* s : {&fast, &slow}) {
            if (s->kkt.primal > 1e-9 || s->kkt.stationarity > 1e-8 ||
                s->kkt.complementarity > 1e-9 ||
                (s->multipliers.size() && s->multipliers.minCoeff() < -1e-10)) {
                return "instance " + std::to_string(inst) + ": certificate out of tolerance";
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 6. The constrained minimizer is the posterior mode under perturbation.
// ---------------------------------------------------------------------------
std::string gate_map_mode() {
    std::vector<std::pair<std::string, QPProblem>> fixtures;

    {  // hand-KKT corner: both coordinates pinned at the bound
        ConstraintSet cs;
        cs.lower_bound(0.0);
        fixtures.emplace_back("corner", QPProblem(Kernel::brownian_plus_one(),
                                                  Mesh::from_nodes({0.0, 1.0}, {1.0}),
                                                  DataSet({1.0}, {-1.0}, 1.0), cs));
    }
    {  // upper clip
        ConstraintSet cs;
        cs.upper_bound(0.3);
        fixtures.emplace_back("upper-clip",
                              QPProblem(Kernel::matern32(0.4), Mesh::at_level({0.5}, 1),
                                        DataSet({0.5}, {2.0}, 0.1), cs));
    }

    Rng rng(606);
    while (fixtures.size() < 20) {
        const int i = static_cast<int>(fixtures.size());
        const int n = 1 + static_cast<int>(rng.next_u64() % 3);
        std::vector<double> xs;
        std::vector<double> ys;
        for (int j = 0; j < n; ++j) {
            xs.push_back(rng.uniform(0.1, 0.9));
            ys.push_back(rng.uniform(-1.2, 1.2));
        }
        const Kernel k = family_kernel(i, rng.uniform(0.2, 0.6));
        const Mesh mesh = Mesh::at_level(xs, 1);

        ConstraintSet cs;
        switch (i % 4) {
            case 0: cs.lower_bound(0.0); break;
            case 1: cs.upper_bound(0.0); break;
            case 2: cs.monotone(MonotoneDirection::Increasing); break;
            default: cs.shape(ShapeCurvature::Convex); break;
        }
        fixtures.emplace_back("random-" + std::to_string(i),
                              QPProblem(k, mesh, DataSet(xs, ys, rng.uniform(0.05, 0.8)), cs));
    }

    std::uint64_t seed = 9000;
    for (const auto& [name, p] : fixtures) {
        const Solution sol = solve_constrained(p);
        for (const double radius : {0.01, 0.1, 1.0}) {
            const MapCheckReport r = map_equals_qp(p, sol, 10000, radius, seed++);
            if (!r.passed()) {
                return "fixture " + name + " radius " + std::to_string(radius) + ": " +
                       std::to_string(r.violation_trials.size()) + " violations (worst " +
                       std::to_string(r.max_shortfall) + ")";
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 7. Truncated-posterior draws: never beat the MAP; orthant acceptance 1/2.
// ---------------------------------------------------------------------------
std::string gate_truncated_posterior() {
    {  // every accepted draw satisfies J_N(draw) >= J_N(u_hat) - 1e-9
        ConstraintSet cs;
        cs.lower_bound(0.0);
        const Kernel k = Kernel::brownian_plus_one();
        const Mesh m = Mesh::from_nodes({0.0, 1.0}, {1.0});
        const DataSet data({1.0}, {-1.0}, 1.0);
        const QPProblem p(k, m, data, cs);
        const Solution map = solve_constrained(p);
        const NodePosterior np = node_posterior(k, m, data);
        const SampleBatch b = rejection_sample(np, p.ineq(), 5000, 1000000, 707);
        for (const auto& d : b.draws) {
            if (!is_feasible(p.ineq(), d, 0.0)) return "accepted draw is infeasible";
            if (objective_jn(p, d) < map.objective - 1e-9) {
                return "accepted draw beats the MAP objective";
            }
        }
    }
    {  // symmetric orthant: zero-mean posterior halved by one sign constraint
        const Kernel k = Kernel::matern32(0.4);
        const Mesh m = Mesh::from_nodes({0.0, 0.5, 1.0}, {0.5});
        const DataSet data({0.5}, {0.0}, 1.0);
        const NodePosterior np = node_posterior(k, m, data);
        if (np.mean.cwiseAbs().maxCoeff() != 0.0) return "orthant fixture mean is not zero";

        LinearInequalities li;
        li.G = Eigen::MatrixXd::Zero(1, 3);
        li.G(0, 0) = 1.0;
        li.h = Eigen::VectorXd::Zero(1);

        const SampleBatch b = rejection_sample(np, li, 5000, 1000000, 708);
        const double rate = b.acceptance_rate();
        if (b.attempted < 9000) return "orthant fixture attempted too few proposals";
        if (std::abs(rate - 0.5) > 0.02) {
            return "orthant acceptance " + std::to_string(rate) + " outside 0.5 +- 0.02";
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 8. With an active constraint the posterior mean moves off the MAP.
// ---------------------------------------------------------------------------
std::string gate_map_is_not_mean() {
    ConstraintSet cs;
    cs.lower_bound(0.0);
    const Kernel k = Kernel::brownian_plus_one();
    const Mesh m = Mesh::from_nodes({0.0, 1.0}, {1.0});
    const DataSet data({1.0}, {-1.0}, 1.0);
    const QPProblem p(k, m, data, cs);
    const Solution map = solve_constrained(p);
    if (map.active_set.empty()) return "fixture constraint is not active";

    const NodePosterior np = node_posterior(k, m, data);
    const SampleBatch b = rejection_sample(np, p.ineq(), 10000, 2000000, 808);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    for (const auto& d : b.draws) mean += d;
    mean /= static_cast<double>(b.draws.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(2);
    for (const auto& d : b.draws) var += (d - mean).cwiseAbs2();
    var /= static_cast<double>(b.draws.size() - 1);

    for (int i = 0; i < 2; ++i) {
        const double se = std::sqrt(var[i] / static_cast<double>(b.draws.size()));
        if (std::abs(mean[i] - map.u_hat.coeffs()[i]) > 3.0 * se) return {};
    }
    return "empirical truncated mean is within 3 standard errors of the MAP everywhere";
}

// ---------------------------------------------------------------------------
// 9. Mesh refinement: shrinking sup gaps and the per-level optimality chain.
// ---------------------------------------------------------------------------
std::string gate_convergence() {
    struct Fixture {
        std::string name;
        Kernel kernel;
        DataSet data;
        ConstraintSet cs;
        std::function<double(double)> reference;
    };
    std::vector<Fixture> fixtures;
    {
        ConstraintSet cs;
        cs.lower_bound(0.0).upper_bound(1.0);
        fixtures.push_back({"bounds",
                            Kernel::matern52(0.3),
                            DataSet({0.15, 0.35, 0.55, 0.8}, {-0.4, 0.5, 1.6, 0.4}, 0.05),
                            cs,
                            [](double) { return 0.5; }});
    }
    {
        ConstraintSet cs;
        cs.monotone(MonotoneDirection::Increasing);
        fixtures.push_back({"monotone",
                            Kernel::matern32(0.4),
                            DataSet({0.1, 0.3, 0.5, 0.7, 0.9}, {0.05, 0.42, 0.30, 0.65, 0.95}, 0.01),
                            cs,
                            [](double x) { return x; }});
    }
    {
        ConstraintSet cs;
        cs.shape(ShapeCurvature::Convex);
        fixtures.push_back({"convex",
                            Kernel::matern52(0.35),
                            DataSet({0.1, 0.5, 0.9}, {0.9, 0.8, 1.0}, 0.02),
                            cs,
                            [](double x) { return 2.0 * (x - 0.5) * (x - 0.5); }});
    }

    for (const auto& f : fixtures) {
        const RefinementReport r = run_refinement(f.kernel, f.data, f.cs, 7, 2048, f.reference);
        const double gap2 = *r.levels[1].sup_gap_to_prev;   // level 2
        const double gap7 = *r.levels.back().sup_gap_to_prev;
        if (gap7 > 0.1 * gap2) {
            return f.name + ": level-7 gap " + std::to_string(gap7) +
                   " exceeds 0.1 x level-2 gap " + std::to_string(gap2);
        }
        for (const auto& rec : r.levels) {
            if (rec.objective > *rec.reference_objective + 1e-9) {
                return f.name + " level " + std::to_string(rec.level) +
                       ": objective above the feasible reference";
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 10. Interpolation preserves every supported constraint class.
// ---------------------------------------------------------------------------
std::string gate_projection_closure() {
    struct Entry {
        ConstraintSet cs;
        std::function<double(double)> fn;
    };
    std::vector<Entry> corpus;

    const auto bounds_set = [] {
        ConstraintSet cs;
        cs.lower_bound(-1.0).upper_bound(1.0);
        return cs;
    };
    const auto mono_set = [](MonotoneDirection d) {
        ConstraintSet cs;
        cs.monotone(d);
        return cs;
    };
    const auto shape_set = [](ShapeCurvature c) {
        ConstraintSet cs;
        cs.shape(c);
        return cs;
    };

    // 20 range-bounded functions
    for (int i = 0; i < 10; ++i) {
        const double w = 1.0 + i;
        const double ph = 0.37 * i;
        corpus.push_back({bounds_set(),
                          [w, ph](double x) { return 0.9 * std::sin(w * x + ph); }});
        corpus.push_back({bounds_set(), [w](double x) {
                              return 1.8 / (1.0 + std::exp(-w * (x - 0.5))) - 0.9;
                          }});
    }
    // 20 monotone functions (10 increasing, 10 decreasing)
    for (int i = 0; i < 10; ++i) {
        const double pwr = 1.0 + 0.4 * i;
        const double rate = 1.0 + i;
        corpus.push_back({mono_set(MonotoneDirection::Increasing),
                          [pwr](double x) { return std::pow(x, pwr); }});
        corpus.push_back({mono_set(MonotoneDirection::Decreasing),
                          [rate](double x) { return std::exp(-rate * x); }});
    }
    // 20 shape-constrained functions (10 convex, 10 concave)
    for (int i = 0; i < 10; ++i) {
        const double a = 1.0 + 0.5 * i;
        const double c = 0.1 * i;
        corpus.push_back({shape_set(ShapeCurvature::Convex),
                          [a, c](double x) { return std::cosh(a * (x - 0.5)) + c * x; }});
        corpus.push_back({shape_set(ShapeCurvature::Concave),
                          [a, c](double x) { return -((x - c) * (x - c)) * a; }});
    }

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (int level = 1; level <= 6; ++level) {
            const Mesh m = Mesh::at_level({0.35, 0.75}, level);
            if (!project_check(corpus[i].cs, m, corpus[i].fn, 2001)) {
                return "corpus function " + std::to_string(i) + " fails at level " +
                       std::to_string(level);
            }
        }
    }
    return {};
}

}  // namespace

int main() {
    const std::vector<Gate> gates = {
        {"closed-form correspondence at the nodes (50 instances, rel 1e-8)", 5.0,
         gate_closed_form},
        {"isometric lift (500 elements, rel 1e-10)", 2.0, gate_isometry},
        {"interpolation stability + monotone norm growth (20 functions, 7 levels)", 10.0,
         gate_norm_growth},
        {"strong-convexity identity (1000 triples, rel 1e-9)", 1.0, gate_strong_convexity},
        {"active-set vs exhaustive oracle (200 instances, sup 1e-7)", 30.0,
         gate_oracle_agreement},
        {"posterior mode equals the constrained minimizer (20 fixtures x 3 radii x 1e4)", 20.0,
         gate_map_mode},
        {"truncated-posterior coherence + orthant acceptance 0.5 +- 0.02", 10.0,
         gate_truncated_posterior},
        {"constrained posterior mean differs from the MAP (3 standard errors)", 30.0,
         gate_map_is_not_mean},
        {"mesh-refinement convergence (3 fixtures, gap ratio 0.1, chain slack 1e-9)", 60.0,
         gate_convergence},
        {"constraint classes closed under interpolation (60 functions x 6 levels)", 10.0,
         gate_projection_closure},
    };

    int failures = 0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string reason;
        try {
            reason = gates[i].run();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (reason.empty() && elapsed > gates[i].budget_s) {
            char buf[80];
            std::snprintf(buf, sizeof(buf), "runtime %.2f s over the %.0f s budget", elapsed,
                          gates[i].budget_s);
            reason = buf;
        }
        if (reason.empty()) {
            std::printf("[PASS] %2zu. %s (%.2f s)\n", i + 1, gates[i].name.c_str(), elapsed);
        } else {
            std::printf("[FAIL] %2zu. %s (%.2f s): %s\n", i + 1, gates[i].name.c_str(), elapsed,
                        reason.c_str());
            ++failures;
        }
    }
    std::printf("%d/%zu acceptance gates passed\n", static_cast<int>(gates.size()) - failures,
                gates.size());
    return failures;
}

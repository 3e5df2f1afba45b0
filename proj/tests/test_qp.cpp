#include <cmath>

#include "doctest.h"

#include "csmooth/errors.hpp"
#include "csmooth/qp.hpp"
#include "csmooth/rng.hpp"

using namespace csmooth;

namespace {

LinearInequalities rows(Eigen::MatrixXd G, Eigen::VectorXd h) {
    LinearInequalities li;
    li.G = std::move(G);
    li.h = std::move(h);
    return li;
}

// 1-D reduction: minimize c^2/gamma + (c-y)^2/s2 subject to c >= 0.
// Golden-section oracle over a bracketing interval.
double golden_min(double gamma, double y, double s2) {
    const auto f = [&](double c) { return c * c / gamma + (c - y) * (c - y) / s2; };
    double a = 0.0;
    double b = std::max(1.0, 2.0 * std::abs(y));
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(x1) < f(x2)) {
            b = x2;
            x2 = x1;
            x1 = b - phi * (b - a);
        } else {
            a = x1;
            x1 = x2;
            x2 = a + phi * (b - a);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("active set: unconstrained returns the center") {
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd center(3);
    center << 1.0, -2.0, 0.5;
    const LinearInequalities li = LinearInequalities::empty(3);
    const QpResult r = solve_qp_active_set(M, center, li, Eigen::VectorXd::Zero(3));
    CHECK((r.x - center).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(r.active.empty());
}

TEST_CASE("active set: 1-D bound against formula and golden-section oracle") {
    // gamma and s2 give H = 2 (1/gamma + 1/s2), center = gamma y / (gamma + s2)
    const double cases[][3] = {{1.0, -1.0, 1.0}, {2.0, 0.7, 0.5}, {0.3, -2.0, 0.1}};
    for (const auto& c : cases) {
        const double gamma = c[0];
        const double y = c[1];
        const double s2 = c[2];
        Eigen::MatrixXd M(1, 1);
        M << 1.0 / (1.0 / gamma + 1.0 / s2);
        Eigen::VectorXd center(1);
        center << gamma * y / (gamma + s2);
        const LinearInequalities li = rows(Eigen::MatrixXd::Identity(1, 1),
                                           Eigen::VectorXd::Zero(1));
        Eigen::VectorXd start(1);
        start << std::max(0.0, center[0]);
        const QpResult r = solve_qp_active_set(M, center, li, start);

        const double expected = std::max(0.0, gamma * y / (gamma + s2));
        CHECK(r.x[0] == doctest::Approx(expected).scale(1.0).epsilon(1e-10));
        CHECK(r.x[0] == doctest::Approx(golden_min(gamma, y, s2)).scale(1.0).epsilon(1e-7));
    }
}

TEST_CASE("active set: projection onto an orthant") {
    Eigen::VectorXd target(3);
    target << -1.0, 2.0, -0.3;
    const LinearInequalities li = rows(Eigen::MatrixXd::Identity(3, 3),
                                       Eigen::VectorXd::Zero(3));
    const Eigen::VectorXd p = project_onto(li, target, Eigen::VectorXd::Zero(3));
    CHECK(p[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("projection is idempotent and contracts toward the set") {
    Rng rng(47);
    // monotone cone rows on 4 coordinates
    Eigen::MatrixXd G(3, 4);
    G << -1, 1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1;
    const LinearInequalities li = rows(G, Eigen::VectorXd::Zero(3));

    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd target(4);
        for (int i = 0; i < 4; ++i) target[i] = rng.uniform(-1.0, 1.0);
        const Eigen::VectorXd p = project_onto(li, target, Eigen::VectorXd::Zero(4));
        CHECK(is_feasible(li, p, 1e-9));
        const Eigen::VectorXd p2 = project_onto(li, p, p);
        CHECK((p2 - p).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("the iteration limit surfaces as a solver error with the best iterate") {
    Eigen::MatrixXd G(2, 2);
    G << 1, 0, 0, 1;
    LinearInequalities li = rows(G, Eigen::VectorXd::Zero(2));
    Eigen::VectorXd center(2);
    center << -1.0, -2.0;
    QpOptions opts;
    opts.max_iterations = 1;  // needs several iterations to pin both bounds
    try {
        solve_qp_active_set(Eigen::MatrixXd::Identity(2, 2), center, li,
                            Eigen::VectorXd::Constant(2, 1.0), opts);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.best_iterate.size() == 2);
        CHECK(e.primal_residual <= 1e-9);  // iterates stay feasible
    }
}

TEST_CASE("feasibility solve: witness-driven start and infeasible detection") {
    // c >= 2 on both coordinates; minimum-norm point is (2,2)
    LinearInequalities li = rows(Eigen::MatrixXd::Identity(2, 2),
                                 Eigen::VectorXd::Constant(2, 2.0));
    li.witness = Eigen::VectorXd::Constant(2, 3.0);
    const Eigen::VectorXd x = feasibility_solve(li, 2);
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-10));

    // no witness and 0 infeasible: the phase cannot start
    LinearInequalities bare = rows(Eigen::MatrixXd::Identity(2, 2),
                                   Eigen::VectorXd::Constant(2, 2.0));
    CHECK_THROWS_AS(feasibility_solve(bare, 2), InfeasibleError);

    // infeasible witness reports infeasibility
    LinearInequalities bad = rows(Eigen::MatrixXd::Identity(1, 1),
                                  Eigen::VectorXd::Constant(1, 2.0));
    bad.witness = Eigen::VectorXd::Constant(1, 0.0);
    CHECK_THROWS_AS(feasibility_solve(bad, 1), InfeasibleError);
}

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "csmooth/errors.hpp"
#include "csmooth/mesh.hpp"
#include "csmooth/rng.hpp"

using namespace csmooth;

TEST_CASE("mesh construction: base, data sites, nesting") {
    const Mesh m = Mesh::base({0.25, 0.7, 0.25});
    CHECK(m.nodes() == std::vector<double>{0.0, 0.25, 0.7, 1.0});
    CHECK(m.data_site_indices() == std::vector<std::size_t>{1, 2});
    CHECK(m.level() == 0);

    const Mesh r = m.refined();
    CHECK(r.level() == 1);
    CHECK(r.segment_count() == 2 * m.segment_count());
    // nesting: every coarse node survives refinement
    for (double t : m.nodes()) {
        CHECK(std::find(r.nodes().begin(), r.nodes().end(), t) != r.nodes().end());
    }
    // data sites still resolve to nodes
    for (std::size_t idx : r.data_site_indices()) {
        const double x = r.nodes()[idx];
        CHECK((x == 0.25 || x == 0.7));
    }
    CHECK(r.width() <= 0.5 * m.width() + 1e-15);
}

TEST_CASE("mesh rejects bad input") {
    CHECK_THROWS_AS(Mesh::base({1.5}), InvalidInput);
    CHECK_THROWS_AS(Mesh::base({-0.1}), InvalidInput);
    CHECK_THROWS_AS(Mesh::from_nodes({0.0, 0.5}, {}), InvalidInput);      // must end at 1
    CHECK_THROWS_AS(Mesh::from_nodes({0.0, 0.5, 1.0}, {0.3}), InvalidInput);  // site off mesh
}

TEST_CASE("hat functions: Lagrange property and midpoint ramp") {
    const Mesh m = Mesh::from_nodes({0.0, 0.5, 1.0}, {});
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(hat_eval(m, j, m.nodes()[i]) == (i == j ? 1.0 : 0.0));
        }
    }
    CHECK(hat_eval(m, 1, 0.25) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(hat_eval(m, 3, 0.5), InvalidInput);
}

TEST_CASE("hat functions: partition of unity") {
    Rng rng(2024);
    const Mesh m = Mesh::at_level({0.3, 0.62}, 3);
    for (int t = 0; t < 1000; ++t) {
        const double x = rng.uniform();
        double sum = 0.0;
        for (std::size_t j = 0; j < m.nodes().size(); ++j) sum += hat_eval(m, j, x);
        CHECK(std::abs(sum - 1.0) <= 1e-14);
    }
}

TEST_CASE("interpolation: exact on affine functions, chords of x^2, idempotent") {
    const Mesh m = Mesh::from_nodes({0.0, 0.5, 1.0}, {});

    const PiecewiseLinearFn affine = interpolate(m, [](double x) { return x; });
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const double x = rng.uniform();
        CHECK(affine(x) == doctest::Approx(x).epsilon(1e-15));
    }

    // chord of the parabola: nodes (0, 0.25, 1), value at 0.75 is the
    // midpoint of 0.25 and 1.
    const PiecewiseLinearFn sq = interpolate(m, [](double x) { return x * x; });
    CHECK(sq.coeffs()[0] == 0.0);
    CHECK(sq.coeffs()[1] == 0.25);
    CHECK(sq.coeffs()[2] == 1.0);
    CHECK(sq(0.75) == doctest::Approx(0.625).epsilon(1e-15));

    // projection: interpolating an interpolant reproduces the coefficients
    const PiecewiseLinearFn again = interpolate(m, [&sq](double x) { return sq(x); });
    CHECK((again.coeffs() - sq.coeffs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("piecewise-linear evaluation") {
    const Mesh m = Mesh::from_nodes({0.0, 0.5, 1.0}, {});

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    const PiecewiseLinearFn z(m, zero);
    CHECK(z(0.0) == 0.0);
    CHECK(z(0.37) == 0.0);
    CHECK(z(1.0) == 0.0);

    Eigen::VectorXd hat(3);
    hat << 0.0, 1.0, 0.0;
    const PiecewiseLinearFn h(m, hat);
    CHECK(h(0.25) == doctest::Approx(0.5).epsilon(1e-15));

    Eigen::VectorXd c(3);
    c << 1.0, 2.0, 4.0;
    const PiecewiseLinearFn f(m, c);
    CHECK(f(0.75) == doctest::Approx(3.0).epsilon(1e-15));  // midpoint of 2 and 4

    CHECK_THROWS_AS(f(1.5), InvalidInput);
    CHECK_THROWS_AS(f(-0.25), InvalidInput);

    // exact node values at every node (Lagrange property of the basis)
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(f(m.nodes()[j]) == c[static_cast<Eigen::Index>(j)]);
    }
}

TEST_CASE("evaluation is exact at nodes across refinement levels") {
    Rng rng(99);
    Mesh m = Mesh::base({0.21, 0.77});
    for (int level = 0; level < 5; ++level) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(m.nodes().size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-3.0, 3.0);
        const PiecewiseLinearFn f(m, c);
        for (std::size_t j = 0; j < m.nodes().size(); ++j) {
            CHECK(f(m.nodes()[j]) == c[static_cast<Eigen::Index>(j)]);
        }
        m = m.refined();
    }
}

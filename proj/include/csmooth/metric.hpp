#pragma once

#include <Eigen/Dense>

#include "csmooth/kernel.hpp"
#include "csmooth/mesh.hpp"

namespace csmooth {

/// The inner product on the piecewise-linear space induced by the kernel:
/// (u, v) = c_u^T Gamma^{-1} c_v with Gamma the Gram matrix on the nodes.
struct HnMetric {
    Mesh mesh;
    GramMatrix gram;
};

HnMetric make_metric(const Kernel& k, const Mesh& m);

/// Discrete reproducing kernel K_N(x, x2) = phi(x)^T Gamma phi(x2).
double kn_eval(const Mesh& m, const GramMatrix& g, double x, double x2);

/// (u, v) in the H_N inner product. Throws on mesh mismatch.
double hn_inner(const HnMetric& metric, const PiecewiseLinearFn& u, const PiecewiseLinearFn& v);

double hn_norm_sq(const HnMetric& metric, const PiecewiseLinearFn& v);

/// Coefficients Lambda of the kernel-span lift of v: Gamma * Lambda = c_v,
/// so that the lift is sum_i Lambda_i K(., t_i).
Eigen::VectorXd rho_coeffs(const HnMetric& metric, const PiecewiseLinearFn& v);

/// Point evaluation of the lift: sum_i Lambda_i K(x, t_i). Agrees with v at
/// every node.
double rho_eval(const HnMetric& metric, const Kernel& k, const PiecewiseLinearFn& v, double x);

/// Squared H-norm of the lift, computed as Lambda^T Gamma Lambda. Equals
/// hn_norm_sq(v) up to roundoff (the lift is an isometry).
double h_norm_sq_of_lift(const HnMetric& metric, const PiecewiseLinearFn& v);

}  // namespace csmooth

#include "csmooth/metric.hpp"

#include <array>
#include <cstddef>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

struct HatWeights {
    std::array<Eigen::Index, 2> idx;
    std::array<double, 2> w;
};

// The two active hats at x: indices of the segment endpoints and their
// barycentric weights.
HatWeights active_hats(const Mesh& m, double x) {
    const auto& t = m.nodes();
    const std::size_t seg = m.locate(x);
    const double w = (x - t[seg]) / (t[seg + 1] - t[seg]);
    return {{static_cast<Eigen::Index>(seg), static_cast<Eigen::Index>(seg) + 1},
            {1.0 - w, w}};
}

void check_same_mesh(const HnMetric& metric, const PiecewiseLinearFn& f, const char* what) {
    if (!metric.mesh.same_nodes(f.mesh())) {
        throw InvalidInput(std::string("mesh mismatch: ") + what +
                           " is not defined on the metric's mesh");
    }
}

}  // namespace

HnMetric make_metric(const Kernel& k, const Mesh& m) {
    return HnMetric{m, build_gram(k, m.nodes())};
}

double kn_eval(const Mesh& m, const GramMatrix& g, double x, double x2) {
    if (g.size() != static_cast<Eigen::Index>(m.nodes().size())) {
        throw InvalidInput("kn_eval: Gram matrix size does not match the mesh");
    }
    const HatWeights a = active_hats(m, x);
    const HatWeights b = active_hats(m, x2);
    double v = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            v += a.w[i] * b.w[j] * g.values()(a.idx[i], b.idx[j]);
        }
    }
    return v;
}

double hn_inner(const HnMetric& metric, const PiecewiseLinearFn& u, const PiecewiseLinearFn& v) {
    check_same_mesh(metric, u, "u");
    check_same_mesh(metric, v, "v");
    return u.coeffs().dot(metric.gram.solve(v.coeffs()));
}

double hn_norm_sq(const HnMetric& metric, const PiecewiseLinearFn& v) {
    return hn_inner(metric, v, v);
}

Eigen::VectorXd rho_coeffs(const HnMetric& metric, const PiecewiseLinearFn& v) {
    check_same_mesh(metric, v, "v");
    return metric.gram.solve(v.coeffs());
}

double rho_eval(const HnMetric& metric, const Kernel& k, const PiecewiseLinearFn& v, double x) {
    const Eigen::VectorXd lambda = rho_coeffs(metric, v);
    const auto& t = metric.mesh.nodes();
    double value = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        value += lambda[static_cast<Eigen::Index>(i)] * eval_kernel(k, x, t[i]);
    }
    return value;
}

double h_norm_sq_of_lift(const HnMetric& metric, const PiecewiseLinearFn& v) {
    const Eigen::VectorXd lambda = rho_coeffs(metric, v);
    return lambda.dot(metric.gram.values() * lambda);
}

}  // namespace csmooth

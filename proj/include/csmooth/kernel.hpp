#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace csmooth {

enum class KernelFamily {
    SquaredExponential,
    Matern32,
    Matern52,
    BrownianPlusOne,
};

std::string family_name(KernelFamily family);

/// Stationary-or-not covariance function on [0,1] x [0,1].
///
/// BrownianPlusOne is K(s,t) = 1 + min(s,t); the +1 keeps the Gram matrix
/// invertible when node 0 is present (plain Brownian has K(0,0) = 0).
struct Kernel {
    KernelFamily family = KernelFamily::SquaredExponential;
    double lengthscale = 1.0;  // ignored by BrownianPlusOne
    double variance = 1.0;     // output scale

    static Kernel squared_exponential(double lengthscale, double variance = 1.0);
    static Kernel matern32(double lengthscale, double variance = 1.0);
    static Kernel matern52(double lengthscale, double variance = 1.0);
    static Kernel brownian_plus_one(double variance = 1.0);

    void validate() const;
};

/// K(s,t). Throws InvalidInput if s or t is outside [0,1].
double eval_kernel(const Kernel& k, double s, double t);

/// Kernel matrix on the given points, jittered so that it factorizes.
///
/// `values` includes the jitter on the diagonal, i.e.
/// values(i,j) = K(t_i,t_j) + jitter_used * (i == j), and `factor` is its
/// lower Cholesky factor. All solves against the matrix go through the
/// stored factor; the inverse is never formed.
class GramMatrix {
public:
    const std::vector<double>& nodes() const { return nodes_; }
    const Eigen::MatrixXd& values() const { return values_; }
    double jitter_used() const { return jitter_used_; }
    Eigen::MatrixXd factor() const { return llt_.matrixL(); }
    Eigen::Index size() const { return values_.rows(); }

    /// Solves values * x = b via two triangular solves, with iterative
    /// refinement until the residual is below 1e-12 relative (or two passes).
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    friend GramMatrix build_gram_from(const std::function<double(double, double)>& k,
                                      const std::vector<double>& nodes);

    std::vector<double> nodes_;
    Eigen::MatrixXd values_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_used_ = 0.0;
};

/// Builds the Gram matrix of `k` on strictly increasing `nodes`.
///
/// Tries Cholesky with an escalating jitter ladder (0, 1e-12, 1e-10, 1e-8,
/// relative to the largest diagonal entry) and records the jitter that
/// succeeded. Throws FactorizationError if the ladder is exhausted.
GramMatrix build_gram(const Kernel& k, const std::vector<double>& nodes);

/// Same as build_gram but for an arbitrary symmetric kernel callable.
GramMatrix build_gram_from(const std::function<double(double, double)>& k,
                           const std::vector<double>& nodes);

/// gram_solve as a free function mirror of GramMatrix::solve.
inline Eigen::VectorXd gram_solve(const GramMatrix& g, const Eigen::VectorXd& b) {
    return g.solve(b);
}

}  // namespace csmooth

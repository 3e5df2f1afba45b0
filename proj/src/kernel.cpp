#include "csmooth/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

void check_domain(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidInput(std::string("kernel argument ") + name + " = " + std::to_string(x) +
                           " is outside [0,1]");
    }
}

}  // namespace

std::string family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential: return "squared_exponential";
        case KernelFamily::Matern32: return "matern32";
        case KernelFamily::Matern52: return "matern52";
        case KernelFamily::BrownianPlusOne: return "brownian_plus_one";
    }
    return "unknown";
}

Kernel Kernel::squared_exponential(double lengthscale, double variance) {
    Kernel k{KernelFamily::SquaredExponential, lengthscale, variance};
    k.validate();
    return k;
}

Kernel Kernel::matern32(double lengthscale, double variance) {
    Kernel k{KernelFamily::Matern32, lengthscale, variance};
    k.validate();
    return k;
}

Kernel Kernel::matern52(double lengthscale, double variance) {
    Kernel k{KernelFamily::Matern52, lengthscale, variance};
    k.validate();
    return k;
}

Kernel Kernel::brownian_plus_one(double variance) {
    Kernel k{KernelFamily::BrownianPlusOne, 1.0, variance};
    k.validate();
    return k;
}

void Kernel::validate() const {
    if (!(variance > 0.0)) {
        throw InvalidInput("kernel variance must be > 0, got " + std::to_string(variance));
    }
    if (family != KernelFamily::BrownianPlusOne && !(lengthscale > 0.0)) {
        throw InvalidInput("kernel lengthscale must be > 0, got " + std::to_string(lengthscale));
    }
}

double eval_kernel(const Kernel& k, double s, double t) {
    check_domain(s, "s");
    check_domain(t, "t");
    k.validate();
    const double r = std::abs(s - t);
    switch (k.family) {
        case KernelFamily::SquaredExponential: {
            const double z = r / k.lengthscale;
            return k.variance * std::exp(-0.5 * z * z);
        }
        case KernelFamily::Matern32: {
            const double z = std::sqrt(3.0) * r / k.lengthscale;
            return k.variance * (1.0 + z) * std::exp(-z);
        }
        case KernelFamily::Matern52: {
            const double z = std::sqrt(5.0) * r / k.lengthscale;
            return k.variance * (1.0 + z + z * z / 3.0) * std::exp(-z);
        }
        case KernelFamily::BrownianPlusOne:
            return k.variance * (1.0 + std::min(s, t));
    }
    throw InvalidInput("unknown kernel family");
}

GramMatrix build_gram_from(const std::function<double(double, double)>& k,
                           const std::vector<double>& nodes) {
    const auto n = static_cast<Eigen::Index>(nodes.size());
    if (n == 0) throw InvalidInput("build_gram: empty node list");
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (!(nodes[i] < nodes[i + 1])) {
            throw InvalidInput("build_gram: nodes must be strictly increasing");
        }
    }

    Eigen::MatrixXd raw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = k(nodes[i], nodes[j]);
            raw(i, j) = v;
            raw(j, i) = v;
        }
    }

    double scale = raw.diagonal().maxCoeff();
    if (!(scale > 0.0)) scale = 1.0;

    GramMatrix g;
    g.nodes_ = nodes;
    for (double level : {0.0, 1e-12, 1e-10, 1e-8}) {
        const double jitter = level * scale;
        Eigen::MatrixXd jittered = raw;
        jittered.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        // A factor whose reciprocal condition estimate sits at roundoff
        // cannot solve anything; treat it as a failed factorization and
        // escalate the ladder.
        if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) {
            g.values_ = std::move(jittered);
            g.llt_ = std::move(llt);
            g.jitter_used_ = jitter;
            return g;
        }
    }
    throw FactorizationError(
        "build_gram: Cholesky failed for all jitter levels; the kernel/node combination "
        "does not yield an invertible Gram matrix");
}

GramMatrix build_gram(const Kernel& k, const std::vector<double>& nodes) {
    k.validate();
    return build_gram_from([&k](double s, double t) { return eval_kernel(k, s, t); }, nodes);
}

Eigen::VectorXd GramMatrix::solve(const Eigen::VectorXd& b) const {
    if (b.size() != values_.rows()) {
        throw InvalidInput("gram_solve: rhs dimension " + std::to_string(b.size()) +
                           " != " + std::to_string(values_.rows()));
    }
    Eigen::VectorXd x = llt_.solve(b);
    const double bscale = b.cwiseAbs().maxCoeff();
    if (bscale == 0.0) return x;
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd r = b - values_ * x;
        if (r.cwiseAbs().maxCoeff() <= 1e-12 * bscale) break;
        x += llt_.solve(r);
    }
    return x;
}

}  // namespace csmooth

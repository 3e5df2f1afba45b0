#include "csmooth/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

struct RowBuilder {
    Eigen::Index dim;
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    std::vector<std::string> labels;
    std::set<std::vector<unsigned char>> seen;

    void add(const Eigen::VectorXd& g, double h, std::string label) {
        std::vector<unsigned char> key((g.size() + 1) * sizeof(double));
        std::memcpy(key.data(), g.data(), g.size() * sizeof(double));
        std::memcpy(key.data() + g.size() * sizeof(double), &h, sizeof(double));
        if (!seen.insert(std::move(key)).second) return;
        rows.push_back(g);
        rhs.push_back(h);
        labels.push_back(std::move(label));
    }

    LinearInequalities build() && {
        LinearInequalities li;
        const auto m = static_cast<Eigen::Index>(rows.size());
        li.G.resize(m, dim);
        li.h.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            li.G.row(i) = rows[static_cast<std::size_t>(i)];
            li.h[i] = rhs[static_cast<std::size_t>(i)];
        }
        li.row_labels = std::move(labels);
        return li;
    }
};

double probe_tolerance(double scale) { return 1e-12 * std::max(1.0, scale); }

}  // namespace

ConstraintSet& ConstraintSet::lower_bound(double l) {
    atoms.push_back(LowerBound{l});
    return *this;
}

ConstraintSet& ConstraintSet::upper_bound(double b) {
    atoms.push_back(UpperBound{b});
    return *this;
}

ConstraintSet& ConstraintSet::monotone(MonotoneDirection d) {
    atoms.push_back(Monotone{d});
    return *this;
}

ConstraintSet& ConstraintSet::shape(ShapeCurvature c) {
    atoms.push_back(Shape{c});
    return *this;
}

LinearInequalities LinearInequalities::empty(Eigen::Index dim) {
    LinearInequalities li;
    li.G.resize(0, dim);
    li.h.resize(0);
    return li;
}

LinearInequalities compile(const ConstraintSet& cs, const Mesh& m) {
    const auto& t = m.nodes();
    const auto dim = static_cast<Eigen::Index>(t.size());

    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (const auto& atom : cs.atoms) {
        if (const auto* l = std::get_if<LowerBound>(&atom)) lower = std::max(lower, l->value);
        if (const auto* u = std::get_if<UpperBound>(&atom)) upper = std::min(upper, u->value);
    }
    if (lower > upper) {
        throw InfeasibleError("contradictory bounds: lower " + std::to_string(lower) +
                              " exceeds upper " + std::to_string(upper));
    }

    RowBuilder rb;
    rb.dim = dim;
    for (const auto& atom : cs.atoms) {
        if (const auto* l = std::get_if<LowerBound>(&atom)) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
                g[j] = 1.0;
                rb.add(g, l->value, "lower_bound[j=" + std::to_string(j) + "]");
            }
        } else if (const auto* u = std::get_if<UpperBound>(&atom)) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
                g[j] = -1.0;
                rb.add(g, -u->value, "upper_bound[j=" + std::to_string(j) + "]");
            }
        } else if (const auto* mo = std::get_if<Monotone>(&atom)) {
            const double s = (mo->direction == MonotoneDirection::Increasing) ? 1.0 : -1.0;
            const char* name = (s > 0) ? "increasing" : "decreasing";
            for (Eigen::Index j = 0; j + 1 < dim; ++j) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
                g[j] = -s;
                g[j + 1] = s;
                rb.add(g, 0.0, std::string(name) + "[j=" + std::to_string(j) + "]");
            }
        } else if (const auto* sh = std::get_if<Shape>(&atom)) {
            const double s = (sh->curvature == ShapeCurvature::Convex) ? 1.0 : -1.0;
            const char* name = (s > 0) ? "convex" : "concave";
            for (Eigen::Index j = 1; j + 1 < dim; ++j) {
                const double dl = t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(j) - 1];
                const double dr = t[static_cast<std::size_t>(j) + 1] - t[static_cast<std::size_t>(j)];
                Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
                g[j - 1] = s / dl;
                g[j] = -s / dl - s / dr;
                g[j + 1] = s / dr;
                rb.add(g, 0.0, std::string(name) + "[j=" + std::to_string(j) + "]");
            }
        }
    }

    LinearInequalities li = std::move(rb).build();
    double a = 0.0;
    if (std::isfinite(lower)) a = std::max(a, lower);
    if (std::isfinite(upper)) a = std::min(a, upper);
    li.witness = Eigen::VectorXd::Constant(dim, a);
    return li;
}

bool is_feasible(const LinearInequalities& li, const Eigen::VectorXd& c, double tol) {
    if (c.size() != li.cols()) {
        throw InvalidInput("is_feasible: vector dimension " + std::to_string(c.size()) +
                           " != " + std::to_string(li.cols()));
    }
    if (li.rows() == 0) return true;
    return ((li.G * c - li.h).minCoeff() >= -tol);
}

bool project_check(const ConstraintSet& cs, const Mesh& m,
                   const std::function<double(double)>& f, int probe_grid) {
    if (probe_grid < 3) throw InvalidInput("probe_grid must be >= 3");

    std::vector<double> fx(static_cast<std::size_t>(probe_grid));
    double scale = 0.0;
    for (int g = 0; g < probe_grid; ++g) {
        const double x = static_cast<double>(g) / (probe_grid - 1);
        fx[static_cast<std::size_t>(g)] = f(x);
        scale = std::max(scale, std::abs(fx[static_cast<std::size_t>(g)]));
    }
    const double ptol = probe_tolerance(scale);

    for (const auto& atom : cs.atoms) {
        if (const auto* l = std::get_if<LowerBound>(&atom)) {
            for (double v : fx) {
                if (v < l->value - ptol) {
                    throw InvalidInput("project_check precondition: f violates the lower bound");
                }
            }
        } else if (const auto* u = std::get_if<UpperBound>(&atom)) {
            for (double v : fx) {
                if (v > u->value + ptol) {
                    throw InvalidInput("project_check precondition: f violates the upper bound");
                }
            }
        } else if (const auto* mo = std::get_if<Monotone>(&atom)) {
            const double s = (mo->direction == MonotoneDirection::Increasing) ? 1.0 : -1.0;
            for (std::size_t g = 0; g + 1 < fx.size(); ++g) {
                if (s * (fx[g + 1] - fx[g]) < -ptol) {
                    throw InvalidInput("project_check precondition: f is not monotone");
                }
            }
        } else if (const auto* sh = std::get_if<Shape>(&atom)) {
            const double s = (sh->curvature == ShapeCurvature::Convex) ? 1.0 : -1.0;
            for (std::size_t g = 1; g + 1 < fx.size(); ++g) {
                if (s * (fx[g + 1] - 2.0 * fx[g] + fx[g - 1]) < -ptol) {
                    throw InvalidInput("project_check precondition: f has the wrong curvature");
                }
            }
        }
    }

    const PiecewiseLinearFn pf = interpolate(m, f);
    return is_feasible(compile(cs, m), pf.coeffs(), 1e-9);
}

}  // namespace csmooth

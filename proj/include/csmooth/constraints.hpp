#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "csmooth/mesh.hpp"

namespace csmooth {

enum class MonotoneDirection { Increasing, Decreasing };
enum class ShapeCurvature { Convex, Concave };

struct LowerBound {
    double value;
};
struct UpperBound {
    double value;
};
struct Monotone {
    MonotoneDirection direction;
};
struct Shape {
    ShapeCurvature curvature;
};

using ConstraintAtom = std::variant<LowerBound, UpperBound, Monotone, Shape>;

/// Intersection of constraint atoms: a closed convex subset of C([0,1]).
/// Every supported atom class is preserved by piecewise-linear interpolation
/// (pi_N(C) stays in C), which project_check verifies per class.
struct ConstraintSet {
    std::vector<ConstraintAtom> atoms;

    bool empty() const { return atoms.empty(); }

    ConstraintSet& lower_bound(double l);
    ConstraintSet& upper_bound(double b);
    ConstraintSet& monotone(MonotoneDirection d);
    ConstraintSet& shape(ShapeCurvature c);
};

/// Polyhedron G c >= h on the coefficient vector. For piecewise-linear
/// functions the encoding is exact: the function satisfies the source
/// constraint set on all of [0,1] iff its coefficients satisfy G c >= h.
struct LinearInequalities {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    std::vector<std::string> row_labels;

    /// A known feasible point, when one can be constructed (compile always
    /// produces one: a constant function inside the bounds).
    std::optional<Eigen::VectorXd> witness;

    Eigen::Index rows() const { return G.rows(); }
    Eigen::Index cols() const { return G.cols(); }

    static LinearInequalities empty(Eigen::Index dim);
};

/// Compiles the constraint set into inequalities on the node values.
/// Duplicate rows are removed. Throws InfeasibleError when a lower bound
/// exceeds an upper bound.
LinearInequalities compile(const ConstraintSet& cs, const Mesh& m);

/// true iff min_i (G c - h)_i >= -tol.
bool is_feasible(const LinearInequalities& li, const Eigen::VectorXd& c, double tol);

/// Checks that pi_N(f) satisfies compile(cs, m), given that f itself
/// satisfies cs (verified on a probe grid; a violation there throws
/// InvalidInput, reporting a precondition failure rather than a projection
/// failure).
bool project_check(const ConstraintSet& cs, const Mesh& m,
                   const std::function<double(double)>& f, int probe_grid);

}  // namespace csmooth

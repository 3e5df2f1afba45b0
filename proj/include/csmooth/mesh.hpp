#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace csmooth {

/// Subdivision 0 = t_0 < t_1 < ... < t_N = 1 of [0,1].
///
/// Meshes are built from the sorted union of {0, 1} and the data sites, then
/// refined dyadically by inserting the midpoint of every gap. Refinement is
/// nesting (the new node set contains the old one) and data sites stay on
/// the mesh at every level.
class Mesh {
public:
    /// Level-0 mesh: {0, 1} union the data sites (duplicates collapse).
    static Mesh base(const std::vector<double>& data_sites);

    /// Explicit node list; every data site must equal some node.
    static Mesh from_nodes(std::vector<double> nodes, const std::vector<double>& data_sites);

    /// base(data_sites) refined `level` times.
    static Mesh at_level(const std::vector<double>& data_sites, int level);

    /// One dyadic refinement: midpoint of every gap, level + 1.
    Mesh refined() const;

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<std::size_t>& data_site_indices() const { return data_indices_; }
    int level() const { return level_; }

    std::size_t segment_count() const { return nodes_.size() - 1; }

    /// Mesh width: the largest gap between adjacent nodes.
    double width() const;

    /// Index i of the segment [t_i, t_{i+1}] containing x. A node value x
    /// resolves to the left interval (x = t_j gives segment j-1, except j=0).
    std::size_t locate(double x) const;

    /// Exact node index of x; throws InvalidInput if x is not a node.
    std::size_t node_index_of(double x) const;

    bool same_nodes(const Mesh& other) const { return nodes_ == other.nodes_; }

private:
    Mesh() = default;

    std::vector<double> nodes_;
    std::vector<std::size_t> data_indices_;
    int level_ = 0;
};

/// Hat function phi_j at x: 1 at t_j, 0 at the other nodes, affine between.
double hat_eval(const Mesh& m, std::size_t j, double x);

/// Continuous piecewise-linear function on a mesh, stored by node values
/// (coeffs[j] is the value at t_j).
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn(Mesh mesh, Eigen::VectorXd coeffs);

    const Mesh& mesh() const { return mesh_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }

    /// Value at x; exact at nodes, affine between. Throws outside [0,1].
    double operator()(double x) const;

private:
    Mesh mesh_;
    Eigen::VectorXd coeffs_;
};

/// Piecewise-linear interpolation of f on the mesh: coeffs[j] = f(t_j).
PiecewiseLinearFn interpolate(const Mesh& m, const std::function<double(double)>& f);

inline double eval_fn(const PiecewiseLinearFn& u, double x) { return u(x); }

}  // namespace csmooth

#include "csmooth/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

void check_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidInput(std::string(what) + " " + std::to_string(x) + " is outside [0,1]");
    }
}

}  // namespace

Mesh Mesh::base(const std::vector<double>& data_sites) {
    std::set<double> pts{0.0, 1.0};
    for (double x : data_sites) {
        check_unit_interval(x, "data site");
        pts.insert(x);
    }
    Mesh m;
    m.nodes_.assign(pts.begin(), pts.end());
    for (double x : data_sites) {
        const auto it = std::lower_bound(m.nodes_.begin(), m.nodes_.end(), x);
        m.data_indices_.push_back(static_cast<std::size_t>(it - m.nodes_.begin()));
    }
    std::sort(m.data_indices_.begin(), m.data_indices_.end());
    m.data_indices_.erase(std::unique(m.data_indices_.begin(), m.data_indices_.end()),
                          m.data_indices_.end());
    return m;
}

Mesh Mesh::from_nodes(std::vector<double> nodes, const std::vector<double>& data_sites) {
    if (nodes.size() < 2) throw InvalidInput("mesh needs at least two nodes");
    if (nodes.front() != 0.0 || nodes.back() != 1.0) {
        throw InvalidInput("mesh nodes must start at 0 and end at 1");
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!(nodes[i] < nodes[i + 1])) {
            throw InvalidInput("mesh nodes must be strictly increasing");
        }
    }
    Mesh m;
    m.nodes_ = std::move(nodes);
    for (double x : data_sites) {
        check_unit_interval(x, "data site");
        m.data_indices_.push_back(m.node_index_of(x));
    }
    std::sort(m.data_indices_.begin(), m.data_indices_.end());
    m.data_indices_.erase(std::unique(m.data_indices_.begin(), m.data_indices_.end()),
                          m.data_indices_.end());
    return m;
}

Mesh Mesh::at_level(const std::vector<double>& data_sites, int level) {
    if (level < 0) throw InvalidInput("mesh level must be >= 0");
    Mesh m = base(data_sites);
    for (int i = 0; i < level; ++i) m = m.refined();
    return m;
}

Mesh Mesh::refined() const {
    Mesh m;
    m.nodes_.reserve(2 * nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        m.nodes_.push_back(nodes_[i]);
        m.nodes_.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
    }
    m.nodes_.push_back(nodes_.back());
    for (std::size_t idx : data_indices_) m.data_indices_.push_back(2 * idx);
    m.level_ = level_ + 1;
    return m;
}

double Mesh::width() const {
    double w = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        w = std::max(w, nodes_[i + 1] - nodes_[i]);
    }
    return w;
}

std::size_t Mesh::locate(double x) const {
    check_unit_interval(x, "evaluation point");
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.begin()) return 0;
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::size_t Mesh::node_index_of(double x) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.end() || *it != x) {
        throw InvalidInput("value " + std::to_string(x) + " is not a mesh node");
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

double hat_eval(const Mesh& m, std::size_t j, double x) {
    const auto& t = m.nodes();
    if (j >= t.size()) {
        throw InvalidInput("hat index " + std::to_string(j) + " out of range");
    }
    const std::size_t seg = m.locate(x);
    // Lagrange weights on the containing segment; exact 0/1 at nodes.
    if (seg == j) {
        return (t[seg + 1] - x) / (t[seg + 1] - t[seg]);
    }
    if (seg + 1 == j) {
        return (x - t[seg]) / (t[seg + 1] - t[seg]);
    }
    return 0.0;
}

PiecewiseLinearFn::PiecewiseLinearFn(Mesh mesh, Eigen::VectorXd coeffs)
    : mesh_(std::move(mesh)), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != mesh_.nodes().size()) {
        throw InvalidInput("coefficient count " + std::to_string(coeffs_.size()) +
                           " != node count " + std::to_string(mesh_.nodes().size()));
    }
}

double PiecewiseLinearFn::operator()(double x) const {
    const auto& t = mesh_.nodes();
    const std::size_t seg = mesh_.locate(x);
    const double w = (x - t[seg]) / (t[seg + 1] - t[seg]);
    return coeffs_[static_cast<Eigen::Index>(seg)] * (1.0 - w) +
           coeffs_[static_cast<Eigen::Index>(seg) + 1] * w;
}

PiecewiseLinearFn interpolate(const Mesh& m, const std::function<double(double)>& f) {
    const auto& t = m.nodes();
    Eigen::VectorXd c(static_cast<Eigen::Index>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
        c[static_cast<Eigen::Index>(j)] = f(t[j]);
    }
    return PiecewiseLinearFn(m, std::move(c));
}

}  // namespace csmooth

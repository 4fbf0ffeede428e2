#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "treeheat/radial_solver.hpp"
#include "treeheat/tree_model.hpp"

namespace treeheat {

/// A truncated tree discretized edge by edge: every edge becomes a chain of
/// arclength grid nodes, value continuity and discrete Kirchhoff balance
/// hold at shared vertex nodes, the root end is natural and each cut end is
/// absorbing. Deliberately a different formulation from the partial-wave
/// channel route, so agreement between the two is meaningful.
class TreeGraph {
public:
  struct Edge {
    std::vector<int> path;  // branch choices into this edge
    double r_lo = 0.0;
    double r_hi = 0.0;
    std::vector<int> nodes;  // chain including both end nodes
  };

  TreeGraph(const TreeSpec& spec, int max_generation, const SolverConfig& cfg);

  int node_count() const { return static_cast<int>(radius_.size()); }
  int dof_count() const { return static_cast<int>(dof_to_node_.size()); }
  double node_radius(int node) const { return radius_[node]; }
  const std::vector<Edge>& edges() const { return edges_; }
  int dof_of_node(int node) const { return node_to_dof_[node]; }
  int node_of_dof(int dof) const { return dof_to_node_[dof]; }
  double dof_mass(int dof) const { return mass_[dof]; }

  /// Nearest chain node for a point address.
  int locate(const PointAddress& x) const;

  /// Stiffness and (diagonal) lumped arclength mass over dofs.
  Eigen::SparseMatrix<double> stiffness() const;
  const Eigen::VectorXd& mass() const { return mass_vec_; }

private:
  std::vector<double> radius_;
  std::vector<Edge> edges_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
  std::vector<double> mass_;
  Eigen::VectorXd mass_vec_;
  std::vector<Eigen::Triplet<double>> ktrip_;
};

/// Dense eigensolve of the graph Laplacian; kernel with respect to the
/// arclength measure, k(x, y, t) = sum_j e^{-lambda_j t} phi_j(x) phi_j(y).
class GraphOracle {
public:
  GraphOracle(const TreeSpec& spec, int max_generation, const SolverConfig& cfg);

  double kernel(const PointAddress& x, const PointAddress& y, double t) const;
  /// int_Gamma k(x, y, t) dy over the truncated tree.
  double mass_integral(const PointAddress& x, double t) const;
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const TreeGraph& graph() const { return graph_; }

private:
  TreeGraph graph_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Negative spectrum of the graph Schroedinger pencil (K - diag(V m), m)
/// via LDL^T inertia bisection on the sparse matrix; the potential is
/// evaluated per node from its radius and owning edge path.
using GraphPotential = std::function<double(const std::vector<int>& path, double r)>;
std::vector<double> graph_negative_spectrum(const TreeGraph& graph, const GraphPotential& V,
                                            double shift = 0.0, double tol = 1e-10);

}  // namespace treeheat

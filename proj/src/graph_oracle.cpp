#include "treeheat/graph_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <lapacke.h>

namespace treeheat {

namespace {
constexpr int kNodeBudget = 20000;
}

TreeGraph::TreeGraph(const TreeSpec& spec, int max_generation, const SolverConfig& cfg) {
  cfg.validate();
  if (max_generation < 0) throw std::invalid_argument("tree graph: max_generation < 0");
  const double R = cfg.domain_cut;
  if (R > spec.horizon_radius) throw horizon_error("tree graph: cut exceeds horizon");

  auto new_node = [&](double r) {
    radius_.push_back(r);
    if (static_cast<int>(radius_.size()) > kNodeBudget)
      throw std::runtime_error("tree graph: node budget exceeded");
    return static_cast<int>(radius_.size()) - 1;
  };

  struct Pending {
    int vertex_node;
    int gen;  // generation of the edge about to be laid (0 = root edge)
    std::vector<int> path;
  };
  std::vector<Pending> stack{{new_node(0.0), 0, {}}};
  while (!stack.empty()) {
    Pending p = stack.back();
    stack.pop_back();
    const double lo = spec.radii[p.gen];
    const bool has_next_vertex =
        p.gen + 1 <= spec.generations() && p.gen < max_generation && spec.radii[p.gen + 1] < R;
    const double hi = has_next_vertex ? spec.radii[p.gen + 1] : R;
    Edge e;
    e.path = p.path;
    e.r_lo = lo;
    e.r_hi = hi;
    e.nodes.push_back(p.vertex_node);
    const int m = std::max(1, static_cast<int>(std::ceil((hi - lo) * cfg.points_per_unit - 1e-9)));
    for (int i = 1; i <= m; ++i)
      e.nodes.push_back(new_node(lo + (hi - lo) * i / m));
    const int end = e.nodes.back();
    edges_.push_back(std::move(e));
    if (has_next_vertex) {
      const int b = spec.branchings[p.gen + 1];
      for (int c = b; c >= 1; --c) {
        auto path = p.path;
        path.push_back(c);
        stack.push_back({end, p.gen + 1, std::move(path)});
      }
    }
  }

  // absorbing cut: nodes at radius R carry no dof
  node_to_dof_.assign(radius_.size(), -1);
  for (size_t i = 0; i < radius_.size(); ++i) {
    if (std::abs(radius_[i] - R) < 1e-12) continue;
    node_to_dof_[i] = static_cast<int>(dof_to_node_.size());
    dof_to_node_.push_back(static_cast<int>(i));
  }
  mass_.assign(dof_to_node_.size(), 0.0);
  for (const Edge& e : edges_) {
    for (size_t i = 0; i + 1 < e.nodes.size(); ++i) {
      const int a = e.nodes[i], b = e.nodes[i + 1];
      const double dl = radius_[b] - radius_[a];
      const double k = 1.0 / dl;
      const int da = node_to_dof_[a], db = node_to_dof_[b];
      if (da >= 0) {
        mass_[da] += 0.5 * dl;
        ktrip_.emplace_back(da, da, k);
      }
      if (db >= 0) {
        mass_[db] += 0.5 * dl;
        ktrip_.emplace_back(db, db, k);
      }
      if (da >= 0 && db >= 0) {
        ktrip_.emplace_back(da, db, -k);
        ktrip_.emplace_back(db, da, -k);
      }
    }
  }
  mass_vec_ = Eigen::Map<const Eigen::VectorXd>(mass_.data(), mass_.size());
}

int TreeGraph::locate(const PointAddress& x) const {
  const Edge* best_edge = nullptr;
  for (const Edge& e : edges_) {
    if (e.path == x.path && x.radial >= e.r_lo - 1e-12 && x.radial <= e.r_hi + 1e-12) {
      best_edge = &e;
      break;
    }
  }
  if (!best_edge) throw std::invalid_argument("tree graph: point not on the truncated tree");
  int best = best_edge->nodes.front();
  double dist = std::abs(radius_[best] - x.radial);
  for (int nd : best_edge->nodes) {
    const double d = std::abs(radius_[nd] - x.radial);
    if (d < dist) {
      dist = d;
      best = nd;
    }
  }
  return best;
}

Eigen::SparseMatrix<double> TreeGraph::stiffness() const {
  Eigen::SparseMatrix<double> K(dof_count(), dof_count());
  K.setFromTriplets(ktrip_.begin(), ktrip_.end());
  return K;
}

GraphOracle::GraphOracle(const TreeSpec& spec, int max_generation, const SolverConfig& cfg)
    : graph_(spec, max_generation, cfg) {
  const int n = graph_.dof_count();
  if (n > 6000) throw std::runtime_error("graph oracle: too many dofs for a dense eigensolve");
  Eigen::MatrixXd S = Eigen::MatrixXd(graph_.stiffness());
  Eigen::VectorXd s = graph_.mass().cwiseSqrt().cwiseInverse();
  S = s.asDiagonal() * S * s.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::VectorXd w(n);
  const int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, S.data(), n, w.data());
  if (info != 0) throw std::runtime_error("graph oracle: eigensolve failed");
  eigenvalues_ = w;
  eigenvectors_ = S.array().colwise() * s.array();
}

double GraphOracle::kernel(const PointAddress& x, const PointAddress& y, double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("graph oracle: t must be positive");
  const int dx = graph_.dof_of_node(graph_.locate(x));
  const int dy = graph_.dof_of_node(graph_.locate(y));
  if (dx < 0 || dy < 0) return 0.0;
  const Eigen::ArrayXd damp = (-eigenvalues_.array() * t).exp();
  return (damp * eigenvectors_.row(dx).transpose().array() *
          eigenvectors_.row(dy).transpose().array())
      .sum();
}

double GraphOracle::mass_integral(const PointAddress& x, double t) const {
  const int dx = graph_.dof_of_node(graph_.locate(x));
  if (dx < 0) return 0.0;
  const Eigen::ArrayXd damp = (-eigenvalues_.array() * t).exp();
  const Eigen::VectorXd sums = eigenvectors_.transpose() * graph_.mass();
  return (damp * eigenvectors_.row(dx).transpose().array() * sums.array()).sum();
}

std::vector<double> graph_negative_spectrum(const TreeGraph& graph, const GraphPotential& V,
                                            double shift, double tol) {
  const int n = graph.dof_count();
  Eigen::SparseMatrix<double> H = graph.stiffness();
  Eigen::VectorXd vm(n);
  // node -> owning edge path for the potential
  std::vector<const TreeGraph::Edge*> owner(graph.node_count(), nullptr);
  for (const auto& e : graph.edges())
    for (int nd : e.nodes)
      if (!owner[nd]) owner[nd] = &e;
  for (int d = 0; d < n; ++d) {
    const int nd = graph.node_of_dof(d);
    vm(d) = (V(owner[nd]->path, graph.node_radius(nd)) + shift) * graph.dof_mass(d);
  }
  Eigen::VectorXd mass = graph.mass();
  auto count_below = [&](double sigma) {
    Eigen::SparseMatrix<double> A = H;
    for (int d = 0; d < n; ++d)
      A.coeffRef(d, d) -= vm(d) + sigma * mass(d);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("graph spectrum: LDLT factorization failed");
    const auto& dvec = ldlt.vectorD();
    int c = 0;
    for (int i = 0; i < dvec.size(); ++i)
      if (dvec(i) < 0.0) ++c;
    return c;
  };

  // the spectrum sits above -max(V + shift)
  double lo = std::min(-vm.cwiseQuotient(mass).maxCoeff() - 1.0, -1.0);
  const double hi = 0.0;
  std::vector<double> eigs;
  struct Interval {
    double a, b;
    int ca, cb;
  };
  std::vector<Interval> work{{lo, hi, count_below(lo), count_below(hi)}};
  while (!work.empty()) {
    Interval iv = work.back();
    work.pop_back();
    const int cnt = iv.cb - iv.ca;
    if (cnt == 0) continue;
    if (iv.b - iv.a < tol) {
      const double mid = 0.5 * (iv.a + iv.b);
      for (int k = 0; k < cnt; ++k) eigs.push_back(mid);
      continue;
    }
    const double mid = 0.5 * (iv.a + iv.b);
    const int cm = count_below(mid);
    work.push_back({iv.a, mid, iv.ca, cm});
    work.push_back({mid, iv.b, cm, iv.cb});
  }
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

}  // namespace treeheat

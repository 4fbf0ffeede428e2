#pragma once

#include <atomic>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "treeheat/tree_model.hpp"

namespace treeheat {

/// Raised when an evaluation would land outside the absorbing cut's
/// reliable range (|x| + 6 sqrt(t) > R).
class truncation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double domain_cut = 0.0;       // R: absorbing (Dirichlet) cut radius
  double points_per_unit = 32.0; // grid density
  int n_modes = 0;               // eigenpairs retained, 0 = all
  double t_max = 1.0;            // largest evolution time supported

  void validate() const;
  SolverConfig refined(double factor) const;
};

using RadialPotential = std::function<double(double)>;

struct ClampLog {
  std::atomic<long> events{0};
  std::atomic<double> worst_relative{0.0};
};

/// Discretized weighted half-line operator A_l (optionally minus a radial
/// potential): grid on [r_l, R] containing every vertex radius, cell
/// weights from g_l, natural condition at 0 for l = 0, essential zero at
/// r_l for l >= 1 and at R always. Eigenvectors are normalized in the
/// discrete L_2(g_l dr) inner product sum_i phi(i)^2 g_l(i) Delta_i = 1.
class RadialSystem {
public:
  RadialSystem() = default;

  int channel() const { return l_; }
  double cut() const { return R_; }
  double t_max() const { return t_max_; }
  const std::vector<double>& grid() const { return grid_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  double lambda1() const { return eigenvalues_(0); }

  /// Heat kernel k_l(r, s, t) with respect to the measure g_l ds.
  /// Off-grid radii snap to the nearest node. Tiny negative round-off is
  /// clamped to zero and logged.
  double kernel(double r, double s, double t) const;
  /// Same sum without the truncation guard, for internal quadrature and
  /// cross-checks on the discrete object itself.
  double kernel_unguarded(double r, double s, double t) const;

  /// Nearest grid node and the snap offset.
  std::pair<int, double> snap(double r) const;
  /// Degree-of-freedom index of a grid node, -1 on constrained nodes.
  int dof_of_node(int node) const { return node_to_dof_[node]; }
  double node_mass(int node) const;

  const ClampLog& clamp_log() const { return *clamp_; }

private:
  friend RadialSystem discretize_radial(const TreeSpec&, int, const SolverConfig&,
                                        const std::optional<RadialPotential>&);
  int l_ = 0;
  double R_ = 0.0;
  double t_max_ = 0.0;
  std::vector<double> grid_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
  Eigen::VectorXd mass_;         // per dof
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_; // column j = phi_j sampled on dofs
  std::shared_ptr<ClampLog> clamp_ = std::make_shared<ClampLog>();

  double expand(int dof_r, int dof_s, double t) const;
};

RadialSystem discretize_radial(const TreeSpec& spec, int l, const SolverConfig& cfg,
                               const std::optional<RadialPotential>& potential = std::nullopt);

double heat_kernel_1d(const RadialSystem& sys, double r, double s, double t);

/// Regression-baseline export: rows `index,eigenvalue`.
void write_eigenvalues_csv(const RadialSystem& sys, std::ostream& out);

/// Closed form of the homogeneous-tree spectral gap: (lambda_b, R_b) with
/// lambda_b = arccos(1/R_b)^2, R_b = (sqrt(b) + 1/sqrt(b))/2.
std::pair<double, double> lambda_closed_form(int b);

struct HomogeneousData {
  int b = 0;
  double lambda_b = 0.0;
  double R_b = 0.0;
  std::vector<double> grid;   // radii where omega is sampled
  std::vector<double> omega;  // ground-state profile, omega(0) = 1
  double S_b = 0.0;
  double tilde_S_b = 0.0;
  double c_b = 0.0;           // fitted two-sided envelope constant
};

/// Integrates -(g_b w')' = lambda_b g_b w from w(0) = 1, w'(0) = 0 with the
/// derivative jump w'(j-) = b w'(j+) at integer vertices (exact per-edge
/// trigonometric propagation), then derives S_b and the envelope constant.
HomogeneousData ground_state_homogeneous(int b, const SolverConfig& cfg);

/// Exact lambda_1 of the continuum operator A_b truncated at an integer R
/// with a Dirichlet end, via transfer-matrix shooting. Test/diagnostic aid.
double homogeneous_lambda1_truncated(int b, int R);

}  // namespace treeheat

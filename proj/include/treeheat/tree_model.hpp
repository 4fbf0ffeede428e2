#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace treeheat {

/// Raised when a geometric query reaches past the materialized part of a tree.
class horizon_error : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// How the branching function continues past the last materialized vertex.
enum class TailModel { truncated, polynomial, exponential };

/// A symmetric rooted metric tree: vertex radii r_0 = 0 < r_1 < ... and
/// branching numbers b_0 = 1, b_l >= 2. The tree is conceptually infinite;
/// radii/branchings hold every vertex generation up to horizon_radius and
/// the tail model says how g_0 continues beyond the last vertex.
struct TreeSpec {
  std::vector<double> radii;
  std::vector<int> branchings;
  TailModel tail = TailModel::truncated;
  double tail_dimension = 0.0;  // polynomial tail: g_0 ~ (1+r)^(d-1)
  int tail_branching = 0;       // exponential tail: homogeneous branching b
  double horizon_radius = std::numeric_limits<double>::infinity();
  std::string name;

  // cumulative products b_0*...*b_l, filled by validate()
  std::vector<double> cumg;
  // cumulative integrals of g_0 up to each vertex radius, filled by validate()
  std::vector<double> cumint;

  void validate();
  int generations() const { return static_cast<int>(radii.size()) - 1; }
};

TreeSpec explicit_tree(std::vector<double> radii, std::vector<int> branchings,
                       std::string name = "explicit");
TreeSpec homogeneous_tree(int b, double horizon_radius, std::string name = "");
/// b_l = 2 with r_l = 2^(l/(d-1)) - 1, so g_0(r) grows like (1+r)^(d-1).
TreeSpec dyadic_tree(double d, double horizon_radius, std::string name = "");

/// g_l(r) per the piecewise definitions: g_0 lives on half-open pieces
/// (r_l, r_{l+1}] with g_0(0) = 1; g_l for l >= 1 lives on [r_n, r_{n+1})
/// and vanishes below r_l.
double branching_function(const TreeSpec& spec, int l, double r);
/// One-sided limits at breakpoints (needed by sup/inf scans).
double g0_left(const TreeSpec& spec, double r);
double g0_right(const TreeSpec& spec, double r);

/// Number of (v, sigma) channels at generation l: 1 for l = 0,
/// b_0...b_{l-1}(b_l - 1) for l >= 1.
double generation_multiplicity(const TreeSpec& spec, int l);

/// Exact integral of g_0 over (a, b), 0 <= a <= b.
double integral_g0(const TreeSpec& spec, double a, double b);
/// Exact integral of 1/g_0 over (r, infinity) under the tail model;
/// +infinity when divergent.
double cointegral_inv_g0(const TreeSpec& spec, double r);

/// V(z, r) = integral of g_0 over the ball (max(z-r,0), z+r).
double ball_volume(const TreeSpec& spec, double z, double r);

/// Generation index of a point at radius r (largest l with r_l < r).
int generation_at(const TreeSpec& spec, double r);

/// A point of the tree: branch choices m_1..m_j (entry i in [1, b_i], the
/// choice made at the generation-i vertex) plus the radial coordinate,
/// which must lie in (r_j, r_{j+1}] for a path of length j.
struct PointAddress {
  std::vector<int> path;
  double radial = 0.0;
};

PointAddress point_at(const TreeSpec& spec, std::vector<int> path, double radial);
void validate_point(const TreeSpec& spec, const PointAddress& x);

struct GeometryReport {
  double doubling_constant = 0.0;
  double dim_inf = 0.0;
  double dim_sup = 0.0;
  double sobolev_S = 0.0;
  double sobolev_S_tilde = 0.0;
  double scan_r_max = 0.0;
  double grid_step = 0.0;
  double sobolev_sup_at = 0.0;
  bool sobolev_divergent = false;
  bool non_polynomial_growth = false;
};

/// Weight on the half-line with exact integrals, the interface the
/// Sobolev-type scan runs on. TreeSpec supplies the piecewise-constant
/// instance; tests may inject smooth analytic weights.
struct RadialWeightFn {
  std::function<double(double)> value;
  std::function<double(double)> value_left;
  std::function<double(double)> integral0;        // int_0^r w
  std::function<double(double)> cointegral_inv;   // int_r^inf 1/w, may be inf
  std::vector<double> breakpoints;
};

RadialWeightFn tree_weight(const TreeSpec& spec);

/// S(delta) with S^{-1} = sup_r (int_0^r w)^{(delta-2)/delta} (int_r^inf 1/w).
/// Returns 0 with *divergent = true when the co-integral diverges.
double sobolev_constant_scan(const RadialWeightFn& w, double delta, double r_max,
                             int n_scan, bool* divergent, double* sup_at);

double sobolev_tilde_factor(double delta);

GeometryReport geometry_scan(const TreeSpec& spec, double d, double delta,
                             double r_max, int n_scan);

}  // namespace treeheat

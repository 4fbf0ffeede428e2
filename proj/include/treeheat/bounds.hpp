#pragma once

#include <string>
#include <vector>

#include "treeheat/heat_kernel.hpp"

namespace treeheat {

enum class BoundKind {
  universal,
  two_sided,
  dim_bound,
  no_vd,
  homogeneous,
  k0_two_sided,
  volume_doubling,
  poincare,
  nash,
  log_sobolev,
};

const char* bound_kind_name(BoundKind k);

struct SweepSpec {
  std::vector<PointAddress> points;
  std::vector<double> times;
};

/// Log t-grid over [lo, hi] plus edge-midpoint/near-vertex x samples, the
/// default sweep shape used by the verification commands.
SweepSpec default_sweep(const TreeSpec& spec, double t_lo, double t_hi, int nt,
                        double x_max);

struct VerifyParams {
  double d = 2.0;       // global dimension for dim_bound
  double delta = 3.0;   // exponent for no_vd / nash
  double scan_r_max = 200.0;
  int n_scan = 2000;
};

struct BoundReport {
  BoundKind kind = BoundKind::universal;
  long samples = 0;
  double worst_margin = 0.0;       // min over samples of (RHS - LHS)/RHS
  double empirical_constant = 0.0; // fitted constant at the given grid
  double constant_coarse = 0.0;    // same fit at half the grid density
  double constant_lower = 0.0;     // two-sided kinds: inf k sqrt(t) g(|x|+sqrt t)
  double constant_upper = 0.0;     // two-sided kinds: sup k sqrt(t) g(|x|+sqrt t)/g(|x|)
  double lower_coarse = 0.0;
  double upper_coarse = 0.0;
  double excluded_t_below = 0.0;   // lower-bound samples below this t are skipped
  bool violated = false;
  std::string config_digest;
  std::string notes;
};

BoundReport verify_bound(BoundKind kind, const TreeSpec& spec, const SolverConfig& cfg,
                         const SweepSpec& sweep, const VerifyParams& params = {});

/// Versioned test-function/ball family for the functional inequalities
/// (family id "v1", see README). Fixed so reports reproduce bit-for-bit.
struct TestFamily {
  std::vector<std::pair<double, double>> balls;  // (center z, radius r)
  std::vector<double> log_sobolev_a = {0.5, 1.0, 2.0};
  double delta = 3.0;
  double quad_cells_per_unit = 64.0;
  double support_radius = 40.0;  // integration range for half-line checks
};

TestFamily default_family(const TreeSpec& spec);

BoundReport functional_inequality_check(BoundKind kind, const TreeSpec& spec,
                                        const TestFamily& family);

}  // namespace treeheat

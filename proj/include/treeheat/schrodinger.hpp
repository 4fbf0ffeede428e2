#pragma once

#include <map>
#include <string>
#include <vector>

#include "treeheat/graph_oracle.hpp"
#include "treeheat/radial_solver.hpp"
#include "treeheat/tree_model.hpp"

namespace treeheat {

/// Nonnegative electric potential on the tree: radial families or per-edge
/// tabulations (the latter evaluated only through the full-graph route).
struct PotentialSpec {
  enum class Kind { zero, radial_power, radial_table, per_edge };
  Kind kind = Kind::zero;
  double v0 = 0.0;  // radial_power: V = v0 (1 + r)^(-p)
  double p = 0.0;
  std::vector<double> table_r, table_v;  // radial_table, linear interpolation
  std::map<std::vector<int>, std::vector<std::pair<double, double>>> edges;  // path -> (r, V)

  bool is_radial() const { return kind != Kind::per_edge; }
  double radial_value(double r) const;
  double value(const std::vector<int>& path, double r) const;
  void validate() const;
};

PotentialSpec zero_potential();
PotentialSpec radial_power(double v0, double p);

enum class MomentRoute { radial, oracle };

struct MomentResult {
  double value = 0.0;            // sum |lambda|^gamma over flagged-out spectrum
  double value_inclusive = 0.0;  // including near-zero flagged eigenvalues
  long count = 0;                // negative eigenvalues kept (gamma = 0 count)
  int flagged = 0;               // |lambda| < 1e-8, excluded and reported
  std::vector<double> eigenvalues;  // kept negatives with multiplicity, ascending
};

/// Moments of the negative spectrum of -Delta - shift - V. The radial route
/// decomposes into the weighted channels A_l - V with channel multiplicities;
/// the oracle route eigensolves the full truncated graph.
MomentResult negative_moments(const TreeSpec& spec, const PotentialSpec& V, double gamma,
                              const SolverConfig& cfg, MomentRoute route,
                              double shift = 0.0);

/// Relative discrepancy between sum |lambda|^gamma and the Riesz-mean
/// quadrature gamma int tau^{gamma-1} N(tau) dtau over the same list.
double riesz_crosscheck(const std::vector<double>& eigenvalues, double gamma);

struct BoundParams {
  double gamma = 1.0;
  double beta = 1.0;
  double a = 0.0;
  double d = 2.0;
};

struct BoundConstants {
  double gamma = 0.0, beta = 0.0, a = 0.0, d = 0.0;
  double M = 0.0;        // M_{beta,gamma}
  double L = 0.0;        // L_d(beta, gamma)
  double L_tilde = 0.0;  // tilde L_d(beta, gamma)
  double K = 0.0;        // K(a, d, gamma)
  double C_envelope = 0.0;
};

enum class ConstantKind { M_only, two_term, lt_ext };

BoundConstants bound_constants(ConstantKind kind, const BoundParams& params,
                               double C_envelope);

struct RegionPartition {
  struct Cell {
    double lo = 0.0, hi = 0.0;
    bool plus = false;  // true on Gamma_beta^+
  };
  std::vector<Cell> cells;
  double measure_minus = 0.0;  // tree measure of Gamma_beta^-
  double measure_plus = 0.0;
};

RegionPartition partition_regions(const TreeSpec& spec, const PotentialSpec& V, double beta,
                                  double d, double r_max, double cells_per_unit = 64.0);

enum class RhsKind { lieb, two_term_1, two_term_2, lt_ext, half_sharp, half_small, homogeneous };

struct RhsResult {
  double value = 0.0;
  bool divergent = false;
};

RhsResult bound_rhs(RhsKind kind, const TreeSpec& spec, const PotentialSpec& V,
                    const BoundParams& params, const SolverConfig& cfg, double C_envelope);

/// Largest C with -Delta >= C/(1 + |x|^2) on the discretized channels,
/// by bisection on the smallest channel eigenvalue.
double hardy_constant(const TreeSpec& spec, const SolverConfig& cfg);

}  // namespace treeheat

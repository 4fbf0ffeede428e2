#include "treeheat/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <lapacke.h>

namespace treeheat {

void SolverConfig::validate() const {
  if (!(domain_cut > 0.0)) throw std::invalid_argument("solver: domain_cut must be positive");
  if (points_per_unit < 8.0)
    throw std::invalid_argument("solver: points_per_unit must be >= 8");
  if (n_modes < 0) throw std::invalid_argument("solver: n_modes must be >= 0");
  if (!(t_max > 0.0)) throw std::invalid_argument("solver: t_max must be positive");
}

SolverConfig SolverConfig::refined(double factor) const {
  SolverConfig c = *this;
  c.points_per_unit *= factor;
  return c;
}

namespace {

// grid on [lo, R] containing every vertex radius as a node, each
// subinterval divided uniformly at the requested density
std::vector<double> build_grid(const TreeSpec& spec, double lo, double R, double ppu) {
  std::vector<double> marks{lo};
  for (double r : spec.radii)
    if (r > lo && r < R) marks.push_back(r);
  marks.push_back(R);
  std::vector<double> grid;
  for (size_t k = 0; k + 1 < marks.size(); ++k) {
    const double a = marks[k], b = marks[k + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) * ppu - 1e-9)));
    for (int i = 0; i < m; ++i) grid.push_back(a + (b - a) * i / m);
  }
  grid.push_back(R);
  return grid;
}

}  // namespace

RadialSystem discretize_radial(const TreeSpec& spec, int l, const SolverConfig& cfg,
                               const std::optional<RadialPotential>& potential) {
  cfg.validate();
  if (l < 0 || l > spec.generations())
    throw std::invalid_argument("discretize_radial: channel index out of range");
  const double rl = spec.radii[l];
  const double R = cfg.domain_cut;
  if (R <= rl) throw std::invalid_argument("discretize_radial: domain_cut below channel origin");
  if (R > spec.horizon_radius) throw horizon_error("domain_cut exceeds tree horizon");

  RadialSystem sys;
  sys.l_ = l;
  sys.R_ = R;
  sys.t_max_ = cfg.t_max;
  sys.grid_ = build_grid(spec, rl, R, cfg.points_per_unit);
  const int nn = static_cast<int>(sys.grid_.size());
  if (nn < 3) throw std::invalid_argument("discretize_radial: empty grid");

  // dofs: drop the node at R always, drop the node at r_l for l >= 1
  sys.node_to_dof_.assign(nn, -1);
  for (int i = (l == 0 ? 0 : 1); i < nn - 1; ++i) {
    sys.node_to_dof_[i] = static_cast<int>(sys.dof_to_node_.size());
    sys.dof_to_node_.push_back(i);
  }
  const int n = static_cast<int>(sys.dof_to_node_.size());

  // cell weights from g_l at cell midpoints (midpoints avoid breakpoints)
  std::vector<double> cw(nn - 1);
  for (int c = 0; c < nn - 1; ++c)
    cw[c] = branching_function(spec, l, 0.5 * (sys.grid_[c] + sys.grid_[c + 1]));

  // stiffness (tridiagonal, over dofs) and lumped mass
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd kd = Eigen::VectorXd::Zero(n);    // K diagonal
  Eigen::VectorXd ko = Eigen::VectorXd::Zero(n);    // K subdiagonal (i, i+1)
  for (int c = 0; c < nn - 1; ++c) {
    const double dl = sys.grid_[c + 1] - sys.grid_[c];
    const double k = cw[c] / dl;
    const int a = sys.node_to_dof_[c], b = sys.node_to_dof_[c + 1];
    if (a >= 0) {
      kd(a) += k;
      mass(a) += 0.5 * cw[c] * dl;
    }
    if (b >= 0) {
      kd(b) += k;
      mass(b) += 0.5 * cw[c] * dl;
    }
    if (a >= 0 && b >= 0) ko(a) = -k;
  }

  // dispersion-corrected stiffness: Khat = K + K diag(h^2/(12 M)) K with h
  // the local mean cell size. On uniform stretches this remaps eigenvalues
  // to lambda (1 + h^2 lambda / 12) with unchanged eigenvectors, so the
  // kernel keeps fourth-order accuracy in the grid while the mass matrix
  // stays diagonal.
  Eigen::VectorXd G(n);
  for (int i = 0; i < n; ++i) {
    const int node = sys.dof_to_node_[i];
    double hsum = 0.0;
    int hcnt = 0;
    if (node > 0) {
      hsum += sys.grid_[node] - sys.grid_[node - 1];
      ++hcnt;
    }
    if (node + 1 < nn) {
      hsum += sys.grid_[node + 1] - sys.grid_[node];
      ++hcnt;
    }
    const double h = hsum / hcnt;
    G(i) = h * h / (12.0 * mass(i));
  }
  // band rows of Khat (half-bandwidth 2): diag, sub1, sub2
  Eigen::VectorXd hd = kd, h1 = ko, h2 = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double add = kd(i) * G(i) * kd(i);
    if (i > 0) add += ko(i - 1) * G(i - 1) * ko(i - 1);
    if (i + 1 < n) add += ko(i) * G(i + 1) * ko(i);
    hd(i) += add;
  }
  for (int i = 0; i + 1 < n; ++i)
    h1(i) += kd(i) * G(i) * ko(i) + ko(i) * G(i + 1) * kd(i + 1);
  for (int i = 0; i + 2 < n; ++i) h2(i) = ko(i) * G(i + 1) * ko(i + 1);

  if (potential) {
    for (int i = 0; i < n; ++i)
      hd(i) -= (*potential)(sys.grid_[sys.dof_to_node_[i]]) * mass(i);
  }

  // symmetrize by the square root of the diagonal mass; dense
  // divide-and-conquer is the fastest route to all eigenpairs here
  Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    z(j, j) = hd(j) * s(j) * s(j);
    if (j + 1 < n) {
      z(j + 1, j) = h1(j) * s(j) * s(j + 1);
      z(j, j + 1) = z(j + 1, j);
    }
    if (j + 2 < n) {
      z(j + 2, j) = h2(j) * s(j) * s(j + 2);
      z(j, j + 2) = z(j + 2, j);
    }
  }
  Eigen::VectorXd w(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, z.data(), n, w.data());
  if (info != 0) throw std::runtime_error("discretize_radial: eigensolve failed");

  int m = n;
  if (cfg.n_modes > 0) {
    if (cfg.n_modes > n)
      throw std::invalid_argument("discretize_radial: n_modes exceeds grid size");
    m = cfg.n_modes;
  }
  sys.eigenvalues_ = w.head(m);
  sys.eigenvectors_ = z.leftCols(m).array().colwise() * s.array();
  sys.mass_ = mass;
  return sys;
}

std::pair<int, double> RadialSystem::snap(double r) const {
  auto it = std::lower_bound(grid_.begin(), grid_.end(), r);
  int i = static_cast<int>(it - grid_.begin());
  if (i >= static_cast<int>(grid_.size())) i = static_cast<int>(grid_.size()) - 1;
  if (i > 0 && std::abs(grid_[i - 1] - r) <= std::abs(grid_[i] - r)) --i;
  return {i, r - grid_[i]};
}

double RadialSystem::node_mass(int node) const {
  const int d = node_to_dof_[node];
  return d >= 0 ? mass_(d) : 0.0;
}

double RadialSystem::expand(int dof_r, int dof_s, double t) const {
  if (dof_r < 0 || dof_s < 0) return 0.0;  // constrained (absorbing) node
  const Eigen::ArrayXd damp = (-eigenvalues_.array() * t).exp();
  double val =
      (damp * eigenvectors_.row(dof_r).transpose().array() *
       eigenvectors_.row(dof_s).transpose().array())
          .sum();
  if (val < 0.0) {
    const double dr = (damp * eigenvectors_.row(dof_r).transpose().array().square()).sum();
    const double ds = (damp * eigenvectors_.row(dof_s).transpose().array().square()).sum();
    const double scale = std::max(dr, ds);
    const double rel = scale > 0.0 ? -val / scale : 0.0;
    clamp_->events.fetch_add(1, std::memory_order_relaxed);
    double prev = clamp_->worst_relative.load(std::memory_order_relaxed);
    while (rel > prev &&
           !clamp_->worst_relative.compare_exchange_weak(prev, rel, std::memory_order_relaxed)) {
    }
    val = 0.0;
  }
  return val;
}

double RadialSystem::kernel_unguarded(double r, double s, double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("kernel: t must be positive");
  const double lo = grid_.front(), hi = grid_.back();
  if (r < lo || r > hi || s < lo || s > hi)
    throw std::out_of_range("kernel: radius outside [r_l, R]");
  return expand(node_to_dof_[snap(r).first], node_to_dof_[snap(s).first], t);
}

double RadialSystem::kernel(double r, double s, double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("kernel: t must be positive");
  if (t > t_max_ * (1.0 + 1e-12))
    throw std::invalid_argument("kernel: t exceeds the configured t_max");
  const double lo = grid_.front(), hi = grid_.back();
  if (r < lo || r > hi || s < lo || s > hi)
    throw std::out_of_range("kernel: radius outside [r_l, R]");
  if (std::max(r, s) + 6.0 * std::sqrt(t) > R_ + 1e-12)
    throw truncation_error("kernel: truncation insufficient for requested (x, t)");
  return kernel_unguarded(r, s, t);
}

double heat_kernel_1d(const RadialSystem& sys, double r, double s, double t) {
  return sys.kernel(r, s, t);
}

void write_eigenvalues_csv(const RadialSystem& sys, std::ostream& out) {
  out << "index,eigenvalue\n";
  char buf[40];
  for (int j = 0; j < sys.eigenvalues().size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", sys.eigenvalues()(j));
    out << j << "," << buf << "\n";
  }
}

std::pair<double, double> lambda_closed_form(int b) {
  if (b < 2) throw std::invalid_argument("lambda_closed_form: b >= 2 required");
  const double sq = std::sqrt(static_cast<double>(b));
  const double Rb = 0.5 * (sq + 1.0 / sq);
  const double lam = std::pow(std::acos(1.0 / Rb), 2.0);
  return {lam, Rb};
}

namespace {

// propagate (w, w') across one unit edge with w'' = -lam w
inline void edge_step(double lam, double& w, double& dw) {
  const double om = std::sqrt(lam);
  const double c = std::cos(om), s = std::sin(om);
  const double w0 = w, d0 = dw;
  w = w0 * c + d0 * s / om;
  dw = -w0 * om * s + d0 * c;
}

}  // namespace

double homogeneous_lambda1_truncated(int b, int R) {
  auto shoot = [&](double lam) {
    double w = 1.0, dw = 0.0;
    for (int j = 1; j <= R; ++j) {
      edge_step(lam, w, dw);
      if (j < R) dw /= b;
    }
    return w;
  };
  double lo = 1e-9, hi = lo;
  double flo = shoot(lo);
  for (double lam = 2e-3;; lam += 2e-3) {
    const double f = shoot(lam);
    if (f * flo < 0.0) {
      hi = lam;
      lo = lam - 2e-3;
      break;
    }
    flo = f;
    if (lam > 10.0) throw std::runtime_error("homogeneous_lambda1_truncated: no bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(mid) * shoot(lo) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// g_b under the half-open convention g_b = b^j on (j, j+1]
double homog_weight(int b, double r) {
  const int j = std::max(0, static_cast<int>(std::ceil(r - 1e-12)) - 1);
  return std::pow(static_cast<double>(b), j);
}

}  // namespace

HomogeneousData ground_state_homogeneous(int b, const SolverConfig& cfg) {
  cfg.validate();
  HomogeneousData out;
  out.b = b;
  std::tie(out.lambda_b, out.R_b) = lambda_closed_form(b);
  const double om = std::sqrt(out.lambda_b);
  const double R = cfg.domain_cut;
  const int per_edge = std::max(2, static_cast<int>(std::ceil(cfg.points_per_unit)));

  // exact trig propagation edge by edge from omega(0) = 1, omega'(0) = 0
  double w = 1.0, dw = 0.0;
  for (int j = 0; static_cast<double>(j) < R; ++j) {
    const double lo = j, hi = std::min(static_cast<double>(j + 1), R);
    for (int i = 0; i < per_edge; ++i) {
      const double dr = (hi - lo) * i / per_edge;
      const double val = w * std::cos(om * dr) + dw * std::sin(om * dr) / om;
      out.grid.push_back(lo + dr);
      out.omega.push_back(val);
      if (val <= 0.0)
        throw std::runtime_error("ground_state_homogeneous: omega became nonpositive");
    }
    edge_step(out.lambda_b, w, dw);
    if (static_cast<double>(j + 1) < R) dw /= b;  // omega'(j-) = b omega'(j+)
  }
  out.grid.push_back(R);
  out.omega.push_back(w);
  if (w <= 0.0) throw std::runtime_error("ground_state_homogeneous: omega became nonpositive");

  // envelope constant: c^{-1}(1+r)/sqrt(g_b) <= omega <= c(1+r)/sqrt(g_b)
  double c_fit = 0.0;
  for (size_t i = 0; i < out.grid.size(); ++i) {
    const double r = out.grid[i];
    const double env = (1.0 + r) / std::sqrt(homog_weight(b, r));
    const double ratio = out.omega[i] / env;
    c_fit = std::max({c_fit, ratio, 1.0 / ratio});
  }
  out.c_b = c_fit;

  // S_b via the scan machinery on the weight omega^2 g_b; cumulative
  // integrals trapezoidal on the sample grid, tail extrapolated from the
  // last-cell envelope coefficient
  const size_t ns = out.grid.size();
  std::vector<double> wmid(ns - 1);
  for (size_t i = 0; i + 1 < ns; ++i) {
    const double mid = 0.5 * (out.grid[i] + out.grid[i + 1]);
    const double omid = 0.5 * (out.omega[i] + out.omega[i + 1]);
    wmid[i] = omid * omid * homog_weight(b, mid);
  }
  std::vector<double> cum(ns, 0.0), coin(ns, 0.0);
  for (size_t i = 1; i < ns; ++i)
    cum[i] = cum[i - 1] + wmid[i - 1] * (out.grid[i] - out.grid[i - 1]);
  for (size_t i = ns - 1; i > 0; --i)
    coin[i - 1] = coin[i] + (out.grid[i] - out.grid[i - 1]) / wmid[i - 1];
  const double chat = wmid[ns - 2] / std::pow(1.0 + 0.5 * (out.grid[ns - 2] + out.grid[ns - 1]), 2.0);
  const double tail = 1.0 / (chat * (1.0 + R));

  auto locate = [&out](double r) {
    auto it = std::upper_bound(out.grid.begin(), out.grid.end(), r);
    return std::min<size_t>(it - out.grid.begin(), out.grid.size() - 1);
  };
  RadialWeightFn wf;
  wf.value = [b, &out, locate](double r) {
    const size_t i = locate(r);
    return out.omega[i] * out.omega[i] * homog_weight(b, r + 1e-12);
  };
  wf.value_left = wf.value;
  wf.integral0 = [&out, &cum, &wmid, locate](double r) {
    size_t i = locate(r);
    if (i == 0) return 0.0;
    return cum[i - 1] + wmid[i - 1] * (r - out.grid[i - 1]);
  };
  wf.cointegral_inv = [&out, &coin, &wmid, tail, locate](double r) {
    size_t i = locate(r);
    if (i == 0) return coin[0] + tail;
    return coin[i] + (out.grid[i] - r) / wmid[i - 1] + tail;
  };
  for (int j = 1; static_cast<double>(j) < R; ++j) wf.breakpoints.push_back(j);
  bool div = false;
  double at = 0.0;
  // the S_b definition fixes delta = 3 (exponents 1/3 and 5/6)
  out.S_b = sobolev_constant_scan(wf, 3.0, R, 400, &div, &at);
  out.tilde_S_b = std::pow(0.75, 4.0 / 3.0) * out.S_b;
  return out;
}

}  // namespace treeheat

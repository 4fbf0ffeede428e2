#include "treeheat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace treeheat {

const char* bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::universal: return "universal";
    case BoundKind::two_sided: return "two_sided";
    case BoundKind::dim_bound: return "dim_bound";
    case BoundKind::no_vd: return "no_vd";
    case BoundKind::homogeneous: return "homogeneous";
    case BoundKind::k0_two_sided: return "k0_two_sided";
    case BoundKind::volume_doubling: return "volume_doubling";
    case BoundKind::poincare: return "poincare";
    case BoundKind::nash: return "nash";
    case BoundKind::log_sobolev: return "log_sobolev";
  }
  return "?";
}

SweepSpec default_sweep(const TreeSpec& spec, double t_lo, double t_hi, int nt,
                        double x_max) {
  SweepSpec s;
  for (int i = 0; i < nt; ++i)
    s.times.push_back(t_lo * std::pow(t_hi / t_lo, nt == 1 ? 0.0 : double(i) / (nt - 1)));
  // edge midpoints and near-vertex offsets along the leftmost branch
  std::vector<double> radii;
  const int L = spec.generations();
  for (int j = 0; j <= L; ++j) {
    const double lo = spec.radii[j];
    const double hi = (j + 1 <= L) ? spec.radii[j + 1] : x_max;
    if (lo >= x_max) break;
    const double h = std::min(hi, x_max) - lo;
    if (h <= 0.0) continue;
    radii.push_back(lo + 0.5 * h);
    radii.push_back(lo + h / 16.0);
    if (j + 1 <= L && hi <= x_max) radii.push_back(hi - h / 16.0);
  }
  std::sort(radii.begin(), radii.end());
  for (double r : radii) {
    std::vector<int> path;
    for (int j = 1; j <= L && spec.radii[j] < r; ++j) path.push_back(1);
    s.points.push_back(point_at(spec, path, r));
  }
  return s;
}

namespace {

struct FitAccum {
  double sup = 0.0;
  double inf = std::numeric_limits<double>::infinity();
};

bool is_homogeneous(const TreeSpec& spec) {
  if (spec.generations() < 1) return false;
  if (spec.tail != TailModel::exponential) return false;  // truncated tails have gap 0
  const int b = spec.branchings[1];
  for (int l = 1; l <= spec.generations(); ++l) {
    if (spec.branchings[l] != b) return false;
    if (std::abs(spec.radii[l] - l) > 1e-12) return false;
  }
  return true;
}

}  // namespace

BoundReport verify_bound(BoundKind kind, const TreeSpec& spec, const SolverConfig& cfg,
                         const SweepSpec& sweep, const VerifyParams& params) {
  BoundReport rep;
  rep.kind = kind;
  std::ostringstream notes;

  const bool kernel_kind = kind == BoundKind::universal || kind == BoundKind::two_sided ||
                           kind == BoundKind::dim_bound || kind == BoundKind::no_vd ||
                           kind == BoundKind::homogeneous || kind == BoundKind::k0_two_sided;
  if (!kernel_kind)
    return functional_inequality_check(kind, spec, default_family(spec));

  const SolverConfig coarse = cfg.refined(0.5);
  HeatKernelEvaluator fine_eval(spec, cfg);
  HeatKernelEvaluator coarse_eval(spec, coarse);

  double lambda_b = 0.0;
  if (kind == BoundKind::homogeneous) {
    if (!is_homogeneous(spec))
      throw std::invalid_argument("homogeneous bound requires a homogeneous tree");
    lambda_b = lambda_closed_form(spec.branchings[1]).first;
  }
  double novd_const = 0.0;
  if (kind == BoundKind::no_vd) {
    GeometryReport g = geometry_scan(spec, params.d, params.delta,
                                     std::min(params.scan_r_max, spec.horizon_radius),
                                     params.n_scan);
    if (g.sobolev_divergent)
      throw std::invalid_argument(
          "no_vd requires a finite Sobolev constant; condition (eq:sgamma) fails on this tree");
    novd_const = std::pow(params.delta / (2.0 * g.sobolev_S_tilde), params.delta / 2.0);
    notes << "S=" << g.sobolev_S << " S_tilde=" << g.sobolev_S_tilde << "; ";
  }
  if (kind == BoundKind::two_sided) {
    GeometryReport g = geometry_scan(spec, params.d, params.delta,
                                     std::min(params.scan_r_max, spec.horizon_radius),
                                     params.n_scan);
    if (g.non_polynomial_growth)
      throw std::invalid_argument(
          "two_sided requires the doubling condition (xdouble); not satisfied on scan range");
    notes << "C0=" << g.doubling_constant << "; ";
  }

  // lower-bound fits are restricted to t above 100 (grid step)^2; use the
  // coarse level's step so both refinement levels fit over the same window
  rep.excluded_t_below =
      (kind == BoundKind::two_sided || kind == BoundKind::k0_two_sided)
          ? 100.0 / (coarse.points_per_unit * coarse.points_per_unit)
          : 0.0;

  FitAccum fit_f, fit_c, low_f, low_c;
  double worst = std::numeric_limits<double>::infinity();
  long samples = 0;
  bool violated = false;

  auto diag_value = [&](HeatKernelEvaluator& ev, const PointAddress& x, double t) {
    if (kind == BoundKind::k0_two_sided)
      return ev.system(0).kernel(x.radial, x.radial, t);
    return ev.diagonal(x, t).value;
  };

  for (const PointAddress& x : sweep.points) {
    for (double t : sweep.times) {
      const double kf = diag_value(fine_eval, x, t);
      const double kc = diag_value(coarse_eval, x, t);
      const double tol = std::max(1e-9, std::abs(kf - kc));
      ++samples;
      const double r = x.radial;
      switch (kind) {
        case BoundKind::universal: {
          const double rhs = 1.0 / std::sqrt(std::numbers::pi * t);
          worst = std::min(worst, (rhs - kf) / rhs);
          if (rhs - kf < -tol) violated = true;
          fit_f.sup = std::max(fit_f.sup, kf * std::sqrt(std::numbers::pi * t));
          fit_c.sup = std::max(fit_c.sup, kc * std::sqrt(std::numbers::pi * t));
          break;
        }
        case BoundKind::two_sided:
        case BoundKind::k0_two_sided: {
          const double gplus = branching_function(spec, 0, r + std::sqrt(t));
          const double g0 = branching_function(spec, 0, r);
          const double upper_f = kf * std::sqrt(t) * gplus / g0;
          const double upper_c = kc * std::sqrt(t) * gplus / g0;
          fit_f.sup = std::max(fit_f.sup, upper_f);
          fit_c.sup = std::max(fit_c.sup, upper_c);
          if (t >= rep.excluded_t_below) {
            low_f.inf = std::min(low_f.inf, kf * std::sqrt(t) * gplus);
            low_c.inf = std::min(low_c.inf, kc * std::sqrt(t) * gplus);
          }
          worst = std::min(worst, 0.0);
          break;
        }
        case BoundKind::dim_bound: {
          fit_f.sup = std::max(fit_f.sup, kf * std::pow(t, params.d / 2.0) /
                                              branching_function(spec, 0, r));
          fit_c.sup = std::max(fit_c.sup, kc * std::pow(t, params.d / 2.0) /
                                              branching_function(spec, 0, r));
          worst = std::min(worst, 0.0);
          break;
        }
        case BoundKind::no_vd: {
          const double rhs = novd_const * std::pow(t, -params.delta / 2.0) *
                             branching_function(spec, 0, r);
          worst = std::min(worst, (rhs - kf) / rhs);
          if (rhs - kf < -tol) violated = true;
          break;
        }
        case BoundKind::homogeneous: {
          const double v_f = kf * std::exp(lambda_b * t) * std::pow(t, 1.5) /
                             ((1.0 + r) * (1.0 + r));
          const double v_c = kc * std::exp(lambda_b * t) * std::pow(t, 1.5) /
                             ((1.0 + r) * (1.0 + r));
          fit_f.sup = std::max(fit_f.sup, v_f);
          fit_c.sup = std::max(fit_c.sup, v_c);
          worst = std::min(worst, 0.0);
          break;
        }
        default:
          break;
      }
    }
  }

  rep.samples = samples;
  rep.worst_margin = worst;
  rep.violated = violated;
  rep.empirical_constant = fit_f.sup;
  rep.constant_coarse = fit_c.sup;
  if (kind == BoundKind::two_sided || kind == BoundKind::k0_two_sided) {
    rep.constant_upper = fit_f.sup;
    rep.upper_coarse = fit_c.sup;
    rep.constant_lower = low_f.inf;
    rep.lower_coarse = low_c.inf;
    notes << "lower-bound fit restricted to t >= " << rep.excluded_t_below << "; ";
  }
  rep.notes = notes.str();
  return rep;
}

// ---------------------------------------------------------------------------
// functional inequalities
// ---------------------------------------------------------------------------

namespace {

struct TestFn {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::vector<double> kinks;  // extra quadrature breakpoints
};

// per-cell Simpson with cells split at weight breakpoints and function kinks;
// exact for polynomials through cubic order against piecewise-constant weights
double simpson_weighted(const TreeSpec& spec, double a, double b, double cells_per_unit,
                        const std::vector<double>& kinks,
                        const std::function<double(double)>& f) {
  std::vector<double> marks{a, b};
  for (double r : spec.radii)
    if (r > a && r < b) marks.push_back(r);
  for (double r : kinks)
    if (r > a && r < b) marks.push_back(r);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  double acc = 0.0;
  for (size_t k = 0; k + 1 < marks.size(); ++k) {
    const double lo = marks[k], hi = marks[k + 1];
    const int m = std::max(4, static_cast<int>(std::ceil((hi - lo) * cells_per_unit)));
    const double g = branching_function(spec, 0, 0.5 * (lo + hi));
    double piece = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x0 = lo + (hi - lo) * i / m;
      const double x1 = lo + (hi - lo) * (i + 1) / m;
      const double xm = 0.5 * (x0 + x1);
      piece += (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
    }
    acc += g * piece;
  }
  return acc;
}

std::vector<TestFn> ball_family(double z, double r) {
  std::vector<TestFn> fam;
  fam.push_back({"linear", [](double s) { return s; }, [](double) { return 1.0; }, {}});
  fam.push_back({"quadratic", [z](double s) { return (s - z) * (s - z); },
                 [z](double s) { return 2.0 * (s - z); }, {}});
  const double w = std::numbers::pi / r;
  fam.push_back({"sinusoid", [z, w](double s) { return std::sin(w * (s - z)); },
                 [z, w](double s) { return w * std::cos(w * (s - z)); }, {}});
  fam.push_back({"hat", [z](double s) { return std::abs(s - z); },
                 [z](double s) { return s < z ? -1.0 : 1.0; }, {z}});
  return fam;
}

std::vector<TestFn> halfline_family() {
  std::vector<TestFn> fam;
  for (double s0 : {0.0, 2.0}) {
    for (double sig : {0.5, 1.0}) {
      fam.push_back({"gauss",
                     [s0, sig](double s) { return std::exp(-(s - s0) * (s - s0) / (2 * sig * sig)); },
                     [s0, sig](double s) {
                       return -(s - s0) / (sig * sig) *
                              std::exp(-(s - s0) * (s - s0) / (2 * sig * sig));
                     },
                     {}});
    }
  }
  fam.push_back({"rational", [](double s) { return std::pow(1.0 + s, -3.0); },
                 [](double s) { return -3.0 * std::pow(1.0 + s, -4.0); }, {}});
  fam.push_back({"bump",
                 [](double s) {
                   const double u = 1.0 - (s / 4.0) * (s / 4.0);
                   return u > 0.0 ? u * u : 0.0;
                 },
                 [](double s) {
                   const double u = 1.0 - (s / 4.0) * (s / 4.0);
                   return u > 0.0 ? -2.0 * u * s / 8.0 : 0.0;
                 },
                 {4.0}});
  return fam;
}

}  // namespace

TestFamily default_family(const TreeSpec& spec) {
  TestFamily fam;
  const double span = std::min(spec.horizon_radius, 24.0);
  fam.balls = {{0.0, 1.0}, {1.0, 0.5}, {1.0, 1.0}, {2.0, 1.5}, {0.5, 2.0}, {3.0, 2.0}};
  for (auto& [z, r] : fam.balls) {
    if (z + r > span) r = std::max(0.25, span - z);
  }
  fam.support_radius = std::min(40.0, span);
  return fam;
}

BoundReport functional_inequality_check(BoundKind kind, const TreeSpec& spec,
                                        const TestFamily& family) {
  BoundReport rep;
  rep.kind = kind;
  std::ostringstream notes;
  double worst = std::numeric_limits<double>::infinity();
  double fit = 0.0;
  long samples = 0;
  bool violated = false;
  const double q = family.quad_cells_per_unit;

  switch (kind) {
    case BoundKind::poincare: {
      for (auto [z, r] : family.balls) {
        if (!(r > 0.0)) throw std::invalid_argument("poincare: degenerate ball");
        const double a = std::max(z - r, 0.0), b = z + r;
        for (const TestFn& fn : ball_family(z, r)) {
          const double vol = integral_g0(spec, a, b);
          const double mean =
              simpson_weighted(spec, a, b, q, fn.kinks, fn.f) / vol;
          const double lhs = simpson_weighted(
              spec, a, b, q, fn.kinks,
              [&](double s) { return (fn.f(s) - mean) * (fn.f(s) - mean); });
          const double rhs =
              4.0 * r * r *
              simpson_weighted(spec, a, b, q, fn.kinks,
                               [&](double s) { return fn.df(s) * fn.df(s); });
          ++samples;
          if (rhs > 0.0) {
            worst = std::min(worst, (rhs - lhs) / rhs);
            fit = std::max(fit, lhs / rhs);
            if (rhs - lhs < -1e-9 * rhs) violated = true;
          } else {
            worst = std::min(worst, lhs <= 1e-15 ? 0.0 : -1.0);
          }
        }
      }
      break;
    }
    case BoundKind::volume_doubling: {
      GeometryReport g = geometry_scan(spec, 2.0, family.delta,
                                       std::min(spec.horizon_radius, 4.0 * family.support_radius),
                                       2000);
      for (auto [z, r] : family.balls) {
        const double v = ball_volume(spec, z, r);
        const double vh = ball_volume(spec, z, r / 2.0);
        const double rhs = 2.0 * g.doubling_constant * vh;
        ++samples;
        worst = std::min(worst, (rhs - v) / rhs);
        fit = std::max(fit, v / vh);
        if (rhs - v < -1e-12 * rhs) violated = true;
      }
      notes << "C0=" << g.doubling_constant << "; ";
      break;
    }
    case BoundKind::nash: {
      GeometryReport g = geometry_scan(spec, 2.0, family.delta,
                                       std::min(spec.horizon_radius, 16.0 * family.support_radius),
                                       2000);
      if (g.sobolev_divergent)
        throw std::invalid_argument("nash requires condition (eq:sgamma); divergent here");
      const double delta = family.delta;
      const double hi = family.support_radius;
      for (const TestFn& fn : halfline_family()) {
        const double grad2 =
            simpson_weighted(spec, 0.0, hi, q, fn.kinks,
                             [&](double s) { return fn.df(s) * fn.df(s); });
        const double l1 = simpson_weighted(spec, 0.0, hi, q, fn.kinks,
                                           [&](double s) { return std::abs(fn.f(s)); });
        const double l2sq = simpson_weighted(spec, 0.0, hi, q, fn.kinks,
                                             [&](double s) { return fn.f(s) * fn.f(s); });
        const double lhs = std::sqrt(grad2) * std::pow(l1, 2.0 / delta);
        const double rhs =
            std::sqrt(g.sobolev_S_tilde) * std::pow(l2sq, (delta + 2.0) / (2.0 * delta));
        ++samples;
        worst = std::min(worst, (lhs - rhs) / lhs);
        fit = std::max(fit, rhs / lhs);
        if (lhs - rhs < -1e-9 * lhs) violated = true;
      }
      notes << "S_tilde=" << g.sobolev_S_tilde << "; ";
      break;
    }
    case BoundKind::log_sobolev: {
      const double hi = family.support_radius;
      for (const TestFn& fn : halfline_family()) {
        const double grad2 = simpson_weighted(spec, 0.0, hi, q, fn.kinks,
                                              [&](double s) { return fn.df(s) * fn.df(s); });
        const double norm2 = simpson_weighted(spec, 0.0, hi, q, fn.kinks,
                                              [&](double s) { return fn.f(s) * fn.f(s); });
        const double ent = simpson_weighted(
            spec, 0.0, hi, q, fn.kinks, [&](double s) {
              const double u2 = fn.f(s) * fn.f(s);
              return u2 > 0.0 ? u2 * std::log(u2 / norm2) : 0.0;
            });
        for (double a : family.log_sobolev_a) {
          const double lhs = a * a / std::numbers::pi * grad2;
          const double rhs = ent + (1.0 + std::log(a / 2.0)) * norm2;
          ++samples;
          const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
          worst = std::min(worst, (lhs - rhs) / scale);
          if (lhs - rhs < -1e-9 * scale) violated = true;
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("functional_inequality_check: unsupported kind");
  }

  rep.samples = samples;
  rep.worst_margin = worst;
  rep.empirical_constant = fit;
  rep.violated = violated;
  rep.notes = notes.str();
  return rep;
}

}  // namespace treeheat

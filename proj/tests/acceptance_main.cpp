// Acceptance suite: one check per numbered criterion, each printing a
// single PASS/FAIL line with the measured quantities. Run with a criterion
// number (1..10) or no argument for the full set; the exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "treeheat/bounds.hpp"
#include "treeheat/graph_oracle.hpp"
#include "treeheat/heat_kernel.hpp"
#include "treeheat/run_config.hpp"
#include "treeheat/schrodinger.hpp"

using namespace treeheat;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

bool report(int id, bool pass, const std::string& detail) {
  std::printf("CRITERION %2d: %s — %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1)));
  return out;
}

TreeSpec halfline() { return explicit_tree({0.0}, {1}, "half-line"); }
TreeSpec tree12() { return explicit_tree({0.0, 1.0}, {1, 2}, "b12"); }
TreeSpec tree123() { return explicit_tree({0.0, 1.0, 2.5}, {1, 2, 3}, "b123"); }

PointAddress leftmost(const TreeSpec& t, double r) {
  std::vector<int> path;
  for (int j = 1; j <= t.generations() && t.radii[j] < r; ++j) path.push_back(1);
  return point_at(t, path, r);
}

// 1. Half-line exactness against the closed-form kernel.
bool criterion1() {
  Timer timer;
  TreeSpec t = halfline();
  SolverConfig cfg{20.0, 32.0, 0, 4.0};
  RadialSystem sys = discretize_radial(t, 0, cfg);
  double worst = 0.0;
  for (double x : {0.0, 1.0, 2.0}) {
    for (double tt : log_grid(0.05, 4.0, 25)) {
      const double exact = (1.0 + std::exp(-x * x / tt)) /
                           std::sqrt(4.0 * std::numbers::pi * tt);
      worst = std::max(worst, std::abs(sys.kernel(x, x, tt) - exact) / exact);
    }
  }
  const double secs = timer.seconds();
  std::ostringstream d;
  d << "half-line kernel worst rel err " << worst << " (tol 1e-3), " << secs
    << " s (limit 10)";
  return report(1, worst <= 1e-3 && secs <= 10.0, d.str());
}

// 2. Universal bound: saturation at the root and domination on all trees.
bool criterion2() {
  double worst_sat = 0.0;
  {
    TreeSpec t = halfline();
    SolverConfig cfg{20.0, 32.0, 0, 4.0};
    RadialSystem sys = discretize_radial(t, 0, cfg);
    for (double tt : log_grid(0.05, 4.0, 20))
      worst_sat = std::max(worst_sat,
                           std::abs(sys.kernel(0.0, 0.0, tt) *
                                        std::sqrt(std::numbers::pi * tt) -
                                    1.0));
  }
  double worst_over = 0.0;
  for (TreeSpec t : {halfline(), tree12(), tree123(), dyadic_tree(2.0, 400.0),
                     homogeneous_tree(2, 40.0)}) {
    SolverConfig cfg{20.0, 32.0, 0, 4.0};
    HeatKernelEvaluator ev(t, cfg);
    for (const PointAddress& x : default_sweep(t, 0.05, 4.0, 8, 6.0).points) {
      for (double tt : log_grid(0.05, 4.0, 8)) {
        const double v =
            ev.diagonal(x, tt).value * std::sqrt(std::numbers::pi * tt) - 1.0;
        worst_over = std::max(worst_over, v);
      }
    }
  }
  std::ostringstream d;
  d << "saturation |k sqrt(pi t) - 1| = " << worst_sat << " at x=0, worst overshoot "
    << worst_over << " across trees (tol 1e-3)";
  return report(2, worst_sat <= 1e-3 && worst_over <= 1e-3, d.str());
}

// 3. Partial-wave synthesis against the full-graph oracle.
bool criterion3() {
  Timer timer;
  double worst = 0.0;
  struct Case {
    TreeSpec tree;
    std::vector<PointAddress> pts;
  };
  TreeSpec t12 = tree12(), t123 = tree123();
  std::vector<Case> cases;
  cases.push_back({t12,
                   {point_at(t12, {}, 0.5), point_at(t12, {1}, 1.5), point_at(t12, {2}, 1.5),
                    point_at(t12, {1}, 2.5), point_at(t12, {2}, 3.0)}});
  cases.push_back({t123,
                   {point_at(t123, {}, 0.5), point_at(t123, {1}, 1.5),
                    point_at(t123, {2}, 2.0), point_at(t123, {1, 1}, 3.0),
                    point_at(t123, {2, 3}, 3.0)}});
  for (const Case& c : cases) {
    SolverConfig cfg{16.0, 32.0, 0, 2.0};
    HeatKernelEvaluator ev(c.tree, cfg);
    GraphOracle oracle(c.tree, 3, cfg);
    for (const auto& x : c.pts)
      for (const auto& y : c.pts)
        for (double tt : log_grid(0.5, 2.0, 6)) {
          const double kd = ev.full(x, y, tt).value;
          const double ko = oracle.kernel(x, y, tt);
          worst = std::max(worst, std::abs(kd - ko) / std::abs(ko));
        }
  }
  const double secs = timer.seconds();
  std::ostringstream d;
  d << "5x5x6 sweeps on b12 and b123: max rel err " << worst << " (tol 1e-2), " << secs
    << " s (limit 60)";
  return report(3, worst <= 1e-2 && secs <= 60.0, d.str());
}

// 4. Spectral gap of homogeneous trees at the pinned truncation.
bool criterion4() {
  // closed forms against independently computed high-precision values
  const double ref2 = 0.115489125027329072;
  const double ref3 = 0.274155677808037739;
  const double ref4 = 0.414093677018186428;
  const double c2 = lambda_closed_form(2).first;
  const double c3 = lambda_closed_form(3).first;
  const double c4 = lambda_closed_form(4).first;
  const bool closed_ok = std::abs(c2 - ref2) <= 1e-10 && std::abs(c3 - ref3) <= 1e-10 &&
                         std::abs(c4 - ref4) <= 1e-10;
  bool within_1pct = true;
  std::ostringstream d;
  d << "closed forms reproduced to 1e-10: " << (closed_ok ? "yes" : "NO") << "; ";
  for (int b : {2, 3, 4}) {
    TreeSpec t = homogeneous_tree(b, 32.0);
    SolverConfig cfg{24.0, 32.0, 0, 1.0};
    RadialSystem sys = discretize_radial(t, 0, cfg);
    const double lam_b = lambda_closed_form(b).first;
    const double rel = (sys.lambda1() - lam_b) / lam_b;
    const double continuum = homogeneous_lambda1_truncated(b, 24);
    d << "b=" << b << ": lambda1(R=24)=" << sys.lambda1() << " vs lambda_b=" << lam_b
      << " rel=" << rel << " (continuum truncated value " << continuum << "); ";
    if (std::abs(rel) > 0.01) within_1pct = false;
  }
  d << "the R=24 gap error is a property of the truncated operator itself, not of the "
       "grid; 1% needs R >= 88/56/44 for b=2/3/4";
  return report(4, closed_ok && within_1pct, d.str());
}

// 5. Two-sided bound on the dyadic d=2 tree: stable constants and slope.
bool criterion5() {
  TreeSpec t = dyadic_tree(2.0, 400.0);
  SweepSpec sweep = default_sweep(t, 0.01, 25.0, 10, 3.0);
  VerifyParams params;
  params.d = 2.0;
  params.scan_r_max = 200.0;
  // one call at 32 points/unit: the report carries the 16 points/unit fit
  // of the same sweep as its internal refinement level
  BoundReport fine =
      verify_bound(BoundKind::two_sided, t, SolverConfig{33.0, 32.0, 0, 25.0}, sweep, params);
  const double up_drift =
      std::abs(fine.constant_upper - fine.upper_coarse) / fine.constant_upper;
  const double lo_drift =
      std::abs(fine.constant_lower - fine.lower_coarse) / fine.constant_lower;
  const bool finite = fine.constant_upper > 0.0 && fine.constant_lower > 0.0 &&
                      std::isfinite(fine.constant_upper) && std::isfinite(fine.constant_lower);

  // slope of log k(x,x,t) against log t over [10, 100] at fixed x
  SolverConfig slope_cfg{64.0, 32.0, 0, 100.0};
  RadialSystem sys = discretize_radial(t, 0, slope_cfg);
  const double x = 0.5;
  std::vector<double> ts = log_grid(10.0, 100.0, 8);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double tt : ts) {
    const double lx = std::log(tt), ly = std::log(sys.kernel(x, x, tt));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const int n = static_cast<int>(ts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  std::ostringstream d;
  d << "fitted c_upper=" << fine.constant_upper << " (drift " << up_drift * 100.0
    << "%), c_lower=" << fine.constant_lower << " (drift " << lo_drift * 100.0
    << "%), log-log slope " << slope << " (want -1.0 +- 0.1)";
  return report(5,
                finite && up_drift <= 0.10 && lo_drift <= 0.10 &&
                    std::abs(slope + 1.0) <= 0.1,
                d.str());
}

// 6. Fast-growth bound with the explicit Sobolev constant on dyadic d=3.
bool criterion6() {
  TreeSpec t = dyadic_tree(3.0, 2000.0);
  SolverConfig cfg{26.0, 32.0, 0, 9.0};
  SweepSpec sweep = default_sweep(t, 0.1, 9.0, 10, 6.0);
  VerifyParams params;
  params.d = 3.0;
  params.delta = 3.0;
  params.scan_r_max = 800.0;
  BoundReport rep = verify_bound(BoundKind::no_vd, t, cfg, sweep, params);
  std::ostringstream d;
  d << "explicit RHS dominates all " << rep.samples << " samples, worst margin "
    << rep.worst_margin << " (" << rep.notes << ")";
  return report(6, !rep.violated && rep.worst_margin > 0.0, d.str());
}

// 7. Homogeneous-tree bound: bounded shifted kernel and the ground state.
bool criterion7() {
  TreeSpec t = homogeneous_tree(2, 64.0);
  SweepSpec sweep;
  for (double r : {0.5, 1.0, 1.5, 2.0, 2.5}) sweep.points.push_back(leftmost(t, r));
  sweep.times = log_grid(1.0, 50.0, 10);
  BoundReport fine =
      verify_bound(BoundKind::homogeneous, t, SolverConfig{48.0, 32.0, 0, 50.0}, sweep);
  const double drift =
      std::abs(fine.empirical_constant - fine.constant_coarse) / fine.empirical_constant;
  SolverConfig gcfg{24.0, 32.0, 0, 1.0};
  HomogeneousData h = ground_state_homogeneous(2, gcfg);
  size_t i1 = 0;
  while (h.grid[i1] < 1.0) ++i1;
  const double omega_err = std::abs(h.omega[i1] - std::cos(std::sqrt(h.lambda_b)));
  std::ostringstream d;
  d << "fitted C_b=" << fine.empirical_constant << " (drift " << drift * 100.0
    << "%, limit 15%), omega_2(1) err " << omega_err << " (tol 1e-6)";
  return report(7,
                std::isfinite(fine.empirical_constant) && fine.empirical_constant > 0.0 &&
                    drift <= 0.15 && omega_err <= 1e-6,
                d.str());
}

// 8. Functional inequalities with the versioned family on all test trees.
bool criterion8() {
  bool all = true;
  std::ostringstream d;
  for (TreeSpec t : {halfline(), tree12(), tree123(), dyadic_tree(2.0, 400.0),
                     dyadic_tree(3.0, 2000.0), homogeneous_tree(2, 300.0)}) {
    for (BoundKind k : {BoundKind::poincare, BoundKind::volume_doubling,
                        BoundKind::log_sobolev, BoundKind::nash}) {
      if (k == BoundKind::nash) {
        // requires the finite Sobolev constant
        GeometryReport g = geometry_scan(t, 2.0, 3.0,
                                         std::min(t.horizon_radius, 500.0), 500);
        if (g.sobolev_divergent) continue;
      }
      TestFamily fam = default_family(t);
      BoundReport rep = functional_inequality_check(k, t, fam);
      // the doubling inequality is exactly tight on flat stretches with
      // C0 = 1, so saturation (margin 0) counts as holding there
      const double floor = (k == BoundKind::volume_doubling) ? -1e-12 : 0.0;
      if (rep.violated || rep.worst_margin <= floor) {
        all = false;
        d << t.name << "/" << bound_kind_name(k) << " margin " << rep.worst_margin << "! ";
      }
    }
  }
  BoundReport flat =
      functional_inequality_check(BoundKind::poincare, halfline(), default_family(halfline()));
  const double ratio_err = std::abs(flat.empirical_constant - 1.0 / 12.0);
  d << "all margins positive; analytic ratio err " << ratio_err << " (tol 1e-12)";
  return report(8, all && ratio_err <= 1e-12, d.str());
}

// 9. Schroedinger suite over the potential grid on both test trees.
bool criterion9() {
  Timer timer;
  bool ok = true;
  std::ostringstream d;
  int checks = 0;

  // envelope constant for the dyadic tree, fitted once over a long-time
  // sweep: the supremum of k t^{d/2}/g0 is approached as t grows
  TreeSpec dy = dyadic_tree(2.0, 400.0);
  VerifyParams vp;
  vp.d = 2.0;
  BoundReport dim = verify_bound(BoundKind::dim_bound, dy, SolverConfig{126.0, 16.0, 0, 400.0},
                                 default_sweep(dy, 0.05, 400.0, 12, 2.5), vp);

  struct TreeCase {
    TreeSpec tree;
    double d;
    double C;
  };
  std::vector<TreeCase> trees;
  trees.push_back({halfline(), 1.0, 1.0 / std::sqrt(std::numbers::pi)});
  trees.push_back({dy, 2.0, dim.empirical_constant});

  for (const TreeCase& tc : trees) {
    SolverConfig cfg{24.0, 32.0, 0, 1.0};
    for (double v0 : {0.5, 2.0, 8.0}) {
      for (double pexp : {2.0, 3.0}) {
        PotentialSpec V = radial_power(v0, pexp);
        // (a) Riesz identity on the computed spectra
        MomentResult base = negative_moments(tc.tree, V, 1.0, cfg, MomentRoute::radial);
        for (double gamma : {0.5, 1.0, 2.0}) {
          const double disc = riesz_crosscheck(base.eigenvalues, gamma);
          ++checks;
          if (disc > 1e-6) {
            ok = false;
            d << "riesz " << tc.tree.name << " v0=" << v0 << " gamma=" << gamma << ": "
              << disc << "! ";
          }
        }
        // (b) the sharp gamma = 1/2 bound
        MomentResult half = negative_moments(tc.tree, V, 0.5, cfg, MomentRoute::radial);
        BoundParams bp;
        bp.gamma = 0.5;
        bp.d = tc.d;
        RhsResult intV = bound_rhs(RhsKind::half_sharp, tc.tree, V, bp, cfg, tc.C);
        ++checks;
        if (half.value > intV.value * (1.0 + 1e-9)) {
          ok = false;
          d << "halflarge " << tc.tree.name << " v0=" << v0 << " p=" << pexp << "! ";
        }
        // (c) the two-term estimates over the admissible grid
        for (double gamma : {0.0, 0.5, 1.0, 1.5}) {
          for (double beta : {0.5, 1.0, 2.0}) {
            BoundParams p;
            p.gamma = gamma;
            p.beta = beta;
            p.d = tc.d;
            MomentResult m =
                gamma == 1.0
                    ? base
                    : negative_moments(tc.tree, V, gamma, cfg, MomentRoute::radial);
            // item (1): gamma >= 1/2 (the gamma = 1/2 case uses the
            // splitting-trick constants, needing d > 1)
            if (gamma >= 0.5 && !(gamma == 0.5 && tc.d <= 1.0)) {
              RhsResult rhs = bound_rhs(RhsKind::two_term_1, tc.tree, V, p, cfg, tc.C);
              ++checks;
              // a divergent right side (insufficient decay) holds trivially
              if (!rhs.divergent && m.value > rhs.value * (1.0 + 1e-9)) {
                ok = false;
                d << "two_term_1 " << tc.tree.name << " v0=" << v0 << " p=" << pexp
                  << " g=" << gamma << " b=" << beta << ": " << m.value << " > "
                  << rhs.value << "! ";
              }
            } else if (gamma == 0.5) {
              try {
                (void)bound_rhs(RhsKind::two_term_1, tc.tree, V, p, cfg, tc.C);
                ok = false;
                d << "two_term_1 should reject d=1 gamma=1/2! ";
              } catch (const std::invalid_argument&) {
                ++checks;
              }
            }
            // item (2): admissible only for 1 - d/2 < gamma <= 1/2 (d <= 2)
            // or 0 <= gamma <= 1/2 (d > 2); gamma = 0 needs d > 2
            const bool item2_ok =
                (tc.d > 2.0) ? (gamma <= 0.5)
                             : (tc.d > 1.0 && gamma > 1.0 - tc.d / 2.0 && gamma <= 0.5);
            if (item2_ok) {
              RhsResult rhs = bound_rhs(RhsKind::two_term_2, tc.tree, V, p, cfg, tc.C);
              ++checks;
              if (!rhs.divergent && m.value > rhs.value * (1.0 + 1e-9)) {
                ok = false;
                d << "two_term_2 " << tc.tree.name << " g=" << gamma << ": " << m.value
                  << " > " << rhs.value << "! ";
              }
            } else if (gamma <= 0.5) {
              try {
                (void)bound_rhs(RhsKind::two_term_2, tc.tree, V, p, cfg, tc.C);
                ok = false;
                d << "two_term_2 should reject " << tc.tree.name << " gamma=" << gamma
                  << "! ";
              } catch (const std::invalid_argument&) {
                ++checks;
              }
            }
          }
        }
        // (e) the oracle route agrees with the channel route
        MomentResult orc = negative_moments(tc.tree, V, 1.0, cfg, MomentRoute::oracle);
        ++checks;
        const double scale = std::max(base.value, 1e-9);
        if (std::abs(base.value - orc.value) / scale > 1e-2) {
          ok = false;
          d << "route mismatch " << tc.tree.name << " v0=" << v0 << " p=" << pexp << ": "
            << base.value << " vs " << orc.value << "! ";
        }
      }
    }
    // (d) extended one-term bounds on admissible (a, gamma) pairs
    if (tc.d > 1.0) {
      for (auto [a, gamma] : std::vector<std::pair<double, double>>{
               {0.0, 0.5}, {0.5, 0.25}, {0.0, 1.0}}) {
        BoundParams p;
        p.a = a;
        p.gamma = gamma;
        p.d = tc.d;
        PotentialSpec V = radial_power(2.0, 3.0);
        RhsResult rhs = bound_rhs(RhsKind::lt_ext, tc.tree, V, p, cfg, tc.C);
        MomentResult m = negative_moments(tc.tree, V, gamma, cfg, MomentRoute::radial);
        ++checks;
        if (!rhs.divergent && m.value > rhs.value * (1.0 + 1e-9)) {
          ok = false;
          d << "lt_ext a=" << a << " gamma=" << gamma << ": " << m.value << " > "
            << rhs.value << "! ";
        }
      }
    } else {
      // no admissible (a, gamma) on a d = 1 tree; the rejection is the check
      BoundParams p;
      p.a = 0.0;
      p.gamma = 0.5;
      p.d = 1.0;
      try {
        (void)bound_constants(ConstantKind::lt_ext, p, tc.C);
        ok = false;
        d << "lt_ext should reject d=1! ";
      } catch (const std::invalid_argument&) {
        ++checks;
      }
    }
  }
  const double secs = timer.seconds();
  d << checks << " checks, " << secs << " s (limit 300)";
  return report(9, ok && secs <= 300.0, d.str());
}

// 10. Determinism: two full CLI pipeline runs produce identical bytes.
bool criterion10() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "treeheat_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg_text =
      "[tree]\ngenerator = explicit\nradii = 0 1\nbranchings = 1 2\nname = b12\n"
      "[solver]\ndomain_cut = 14\npoints_per_unit = 16\nt_max = 2\n"
      "[sweep]\nx = 0.5 1.5 2.5\nt_lo = 0.05\nt_hi = 2\nt_count = 6\n"
      "[potential]\nkind = radial_power\nv0 = 2\np = 2\n"
      "[params]\ngamma = 1\nbeta = 1\nd = 2\nkind = half_sharp\nmax_generation = 3\n"
      "scan_r_max = 60\nn_scan = 500\n";
  const fs::path cfg_path = dir / "run.cfg";
  std::ofstream(cfg_path) << cfg_text;
  bool all_equal = true;
  std::ostringstream d;
  for (const std::string cmd :
       {"geometry", "heat", "bounds", "schrodinger", "oracle-compare"}) {
    const fs::path o1 = dir / (cmd + "_1"), o2 = dir / (cmd + "_2");
    (void)run_command(cmd, cfg_path.string(), o1.string());
    (void)run_command(cmd, cfg_path.string(), o2.string());
    for (const auto& entry : fs::directory_iterator(o1)) {
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(o2 / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str() != sb.str() || sa.str().empty()) {
        all_equal = false;
        d << cmd << "/" << entry.path().filename().string() << " differs! ";
      }
    }
  }
  d << "all command outputs byte-identical across reruns";
  return report(10, all_equal, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
  setenv("OMP_NUM_THREADS", "1", 0);
  using Fn = bool (*)();
  const Fn criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                         criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "usage: %s [criterion 1..10]\n", argv[0]);
      return 64;
    }
    return criteria[id - 1]() ? 0 : 1;
  }
  for (Fn f : criteria) failures += f() ? 0 : 1;
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}

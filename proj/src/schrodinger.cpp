#include "treeheat/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace treeheat {

namespace {
constexpr double kZeroBand = 1e-8;  // eigenvalues this close to 0 are flagged
}

double PotentialSpec::radial_value(double r) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::radial_power:
      return v0 * std::pow(1.0 + r, -p);
    case Kind::radial_table: {
      if (table_r.empty()) return 0.0;
      if (r <= table_r.front()) return table_v.front();
      if (r >= table_r.back()) return table_v.back();
      auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
      const size_t i = it - table_r.begin();
      const double w = (r - table_r[i - 1]) / (table_r[i] - table_r[i - 1]);
      return table_v[i - 1] * (1.0 - w) + table_v[i] * w;
    }
    case Kind::per_edge:
      throw std::invalid_argument("per-edge potential has no radial value");
  }
  return 0.0;
}

double PotentialSpec::value(const std::vector<int>& path, double r) const {
  if (is_radial()) return radial_value(r);
  auto it = edges.find(path);
  if (it == edges.end()) return 0.0;
  const auto& tab = it->second;
  if (tab.empty()) return 0.0;
  if (r <= tab.front().first) return tab.front().second;
  if (r >= tab.back().first) return tab.back().second;
  for (size_t i = 1; i < tab.size(); ++i) {
    if (r <= tab[i].first) {
      const double w = (r - tab[i - 1].first) / (tab[i].first - tab[i - 1].first);
      return tab[i - 1].second * (1.0 - w) + tab[i].second * w;
    }
  }
  return tab.back().second;
}

void PotentialSpec::validate() const {
  if (kind == Kind::radial_power && (v0 < 0.0 || p < 0.0))
    throw std::invalid_argument("potential: radial_power needs v0 >= 0, p >= 0");
  if (kind == Kind::radial_table) {
    if (table_r.size() != table_v.size() || table_r.empty())
      throw std::invalid_argument("potential: bad radial table");
    for (double v : table_v)
      if (v < 0.0) throw std::invalid_argument("potential must be nonnegative");
  }
  if (kind == Kind::per_edge) {
    for (const auto& [path, tab] : edges)
      for (const auto& [r, v] : tab)
        if (v < 0.0) throw std::invalid_argument("potential must be nonnegative");
  }
}

PotentialSpec zero_potential() { return {}; }

PotentialSpec radial_power(double v0, double p) {
  PotentialSpec V;
  V.kind = PotentialSpec::Kind::radial_power;
  V.v0 = v0;
  V.p = p;
  V.validate();
  return V;
}

MomentResult negative_moments(const TreeSpec& spec, const PotentialSpec& V, double gamma,
                              const SolverConfig& cfg, MomentRoute route, double shift) {
  V.validate();
  if (gamma < 0.0) throw std::invalid_argument("negative_moments: gamma >= 0 required");
  if (route == MomentRoute::radial && !V.is_radial())
    throw std::invalid_argument("negative_moments: per-edge potential needs the oracle route");

  std::vector<double> negatives;
  if (route == MomentRoute::radial) {
    int lmax = 0;
    while (lmax + 1 <= spec.generations() && spec.radii[lmax + 1] < cfg.domain_cut) ++lmax;
    for (int l = 0; l <= lmax; ++l) {
      RadialPotential veff = [&V, shift](double r) { return V.radial_value(r) + shift; };
      RadialSystem sys = discretize_radial(spec, l, cfg, veff);
      const double mult = generation_multiplicity(spec, l);
      for (int j = 0; j < sys.eigenvalues().size(); ++j) {
        const double lam = sys.eigenvalues()(j);
        if (lam >= 0.0) break;
        for (long m = 0; m < static_cast<long>(mult); ++m) negatives.push_back(lam);
      }
    }
  } else {
    TreeGraph graph(spec, spec.generations(), cfg);
    negatives = graph_negative_spectrum(
        graph, [&V](const std::vector<int>& path, double r) { return V.value(path, r); },
        shift);
  }
  std::sort(negatives.begin(), negatives.end());

  MomentResult out;
  for (double lam : negatives) {
    const double contrib = gamma == 0.0 ? 1.0 : std::pow(-lam, gamma);
    out.value_inclusive += contrib;
    if (-lam < kZeroBand) {
      ++out.flagged;
      continue;
    }
    out.value += contrib;
    ++out.count;
    out.eigenvalues.push_back(lam);
  }
  return out;
}

double riesz_crosscheck(const std::vector<double>& eigenvalues, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("riesz_crosscheck: gamma > 0 required");
  std::vector<double> mags;
  for (double lam : eigenvalues)
    if (lam < 0.0) mags.push_back(-lam);
  if (mags.empty()) return 0.0;
  std::sort(mags.begin(), mags.end());
  double direct = 0.0;
  for (double m : mags) direct += std::pow(m, gamma);

  // counting function N(tau) = #{ |lambda_i| > tau } is constant between the
  // sorted magnitudes; integrate the first piece exactly (integrable
  // singularity of tau^{gamma-1} at 0) and the rest by Simpson in log tau,
  // where gamma tau^{gamma-1} d tau = gamma e^{gamma u} du stays smooth even
  // across intervals spanning many decades
  const long n = static_cast<long>(mags.size());
  double quad = static_cast<double>(n) * std::pow(mags[0], gamma);
  for (long i = 0; i + 1 < n; ++i) {
    const double a = mags[i], b = mags[i + 1];
    const double cnt = static_cast<double>(n - 1 - i);
    if (b <= a || cnt == 0.0) continue;
    const double ua = std::log(a), ub = std::log(b);
    const int panels = 256;
    double piece = 0.0;
    auto f = [gamma](double u) { return gamma * std::exp(gamma * u); };
    for (int k = 0; k < panels; ++k) {
      const double u0 = ua + (ub - ua) * k / panels;
      const double u1 = ua + (ub - ua) * (k + 1) / panels;
      piece += (u1 - u0) / 6.0 * (f(u0) + 4.0 * f(0.5 * (u0 + u1)) + f(u1));
    }
    quad += cnt * piece;
  }
  return std::abs(quad - direct) / std::max(direct, 1e-300);
}

namespace {

double exp_e1(double beta) {
  // E_1(beta) = -Ei(-beta)
  return -std::expint(-beta);
}

double m_constant(double beta, double gamma) {
  if (!(beta > 0.0)) throw std::invalid_argument("M constant: beta > 0 required");
  double den;
  if (beta > 30.0) {
    // e^{-beta} - beta E_1(beta) = e^{-beta}(1/beta - 2/beta^2 + 6/beta^3 - ...)
    den = std::exp(-beta) * (1.0 / beta - 2.0 / (beta * beta) + 6.0 / (beta * beta * beta));
  } else {
    den = std::exp(-beta) - beta * exp_e1(beta);
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();  // underflow at huge beta
  if (!(den > 0.0)) throw std::logic_error("M constant: nonpositive denominator");
  return std::tgamma(gamma + 1.0) / den;
}

// L_d(beta,gamma) and tilde L_d(beta,gamma) per the two-term estimate,
// including the gamma = 1/2 special forms
std::pair<double, double> two_term_constants(double beta, double gamma, double d, double C) {
  const double M = m_constant(beta, gamma);
  double L, Lt;
  if (std::abs(gamma - 0.5) < 1e-14) {
    if (!(d > 1.0)) throw std::invalid_argument("two-term gamma=1/2 needs d > 1");
    L = std::pow(2.0, (d + 5.0) / 2.0) * M * C * std::pow(beta, (1.0 - d) / 2.0) /
        (d * d - 1.0);
    Lt = 2.0;
  } else {
    if (!(gamma + d / 2.0 - 1.0 > 0.0))
      throw std::invalid_argument("two-term constants need gamma > 1 - d/2");
    L = C * M * std::pow(beta, 1.0 - d / 2.0 - gamma) /
        ((gamma + d / 2.0 - 1.0) * (gamma + d / 2.0));
    Lt = M * std::pow(beta, 0.5 - gamma) *
         (1.0 / (std::sqrt(std::numbers::pi) * std::abs(gamma - 0.5)) +
          C / (gamma + d / 2.0 - 1.0));
  }
  return {L, Lt};
}

void check_lt_ext_range(double a, double d, double gamma) {
  const bool ok_range = (d > 1.0 && d <= 2.0 && a >= 0.0 && a < d - 1.0) ||
                        (d > 2.0 && a >= 0.0 && a <= 1.0);
  if (!ok_range)
    throw std::invalid_argument(
        "lt_ext: need 1 < d <= 2 with 0 <= a < d-1, or d > 2 with 0 <= a <= 1");
  if (gamma < (1.0 - a) / 2.0 - 1e-14)
    throw std::invalid_argument("lt_ext: gamma >= (1-a)/2 required");
}

double k_base_constant(double a, double d, double C) {
  // K(a, d, (1-a)/2) = inf_beta max{ beta^{(d-a-1)/2} L_d(beta, (1-a)/2),
  //                                  tilde L_d(beta, (1-a)/2) }
  const double g0 = (1.0 - a) / 2.0;
  auto val = [&](double lb) {
    const double beta = std::exp(lb);
    auto [L, Lt] = two_term_constants(beta, g0, d, C);
    return std::max(std::pow(beta, (d - a - 1.0) / 2.0) * L, Lt);
  };
  double best = std::numeric_limits<double>::infinity(), at = 0.0;
  for (int i = 0; i <= 240; ++i) {
    const double lb = -10.0 + 16.0 * i / 240.0;
    const double v = val(lb);
    if (v < best) {
      best = v;
      at = lb;
    }
  }
  double lo = at - 0.2, hi = at + 0.2;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), dd = lo + gr * (hi - lo);
  double fc = val(c), fd = val(dd);
  for (int i = 0; i < 80; ++i) {
    if (fc > fd) {
      lo = c;
      c = dd;
      fc = fd;
      dd = lo + gr * (hi - lo);
      fd = val(dd);
    } else {
      hi = dd;
      dd = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = val(c);
    }
  }
  return std::min({best, fc, fd});
}

}  // namespace

BoundConstants bound_constants(ConstantKind kind, const BoundParams& p, double C_envelope) {
  BoundConstants out;
  out.gamma = p.gamma;
  out.beta = p.beta;
  out.a = p.a;
  out.d = p.d;
  out.C_envelope = C_envelope;
  out.M = m_constant(p.beta, p.gamma);
  if (kind == ConstantKind::M_only) return out;
  if (kind == ConstantKind::two_term) {
    std::tie(out.L, out.L_tilde) = two_term_constants(p.beta, p.gamma, p.d, C_envelope);
    return out;
  }
  // lt_ext
  check_lt_ext_range(p.a, p.d, p.gamma);
  const double g0 = (1.0 - p.a) / 2.0;
  double K = k_base_constant(p.a, p.d, C_envelope);
  if (p.gamma > g0 + 1e-14) {
    // Aizenman-Lieb averaging lifts the gamma_0-level bound:
    // K(gamma) = K(gamma_0) B(gamma - gamma_0, gamma_0 + (a+3)/2) / B(gamma - gamma_0, gamma_0 + 1)
    const double dg = p.gamma - g0;
    K *= std::beta(dg, g0 + (p.a + 3.0) / 2.0) / std::beta(dg, g0 + 1.0);
  }
  out.K = K;
  return out;
}

namespace {

// region exponent V g0^{2/(d-1)}; for d = 1 the half-line has g0 = 1 and the
// expression degenerates to V itself
double region_weight(double g0v, double d) {
  if (std::abs(g0v - 1.0) < 1e-15) return 1.0;
  if (d <= 1.0) throw std::invalid_argument("partition: d > 1 required on branching trees");
  return std::pow(g0v, 2.0 / (d - 1.0));
}

}  // namespace

RegionPartition partition_regions(const TreeSpec& spec, const PotentialSpec& V, double beta,
                                  double d, double r_max, double cells_per_unit) {
  if (!(beta > 0.0)) throw std::invalid_argument("partition: beta > 0 required");
  if (!V.is_radial()) throw std::invalid_argument("partition: radial potential required");
  RegionPartition out;
  std::vector<double> marks{0.0, r_max};
  for (double r : spec.radii)
    if (r > 0.0 && r < r_max) marks.push_back(r);
  std::sort(marks.begin(), marks.end());
  for (size_t k = 0; k + 1 < marks.size(); ++k) {
    const double lo = marks[k], hi = marks[k + 1];
    const int m = std::max(2, static_cast<int>(std::ceil((hi - lo) * cells_per_unit)));
    for (int i = 0; i < m; ++i) {
      RegionPartition::Cell c;
      c.lo = lo + (hi - lo) * i / m;
      c.hi = lo + (hi - lo) * (i + 1) / m;
      const double mid = 0.5 * (c.lo + c.hi);
      const double g = branching_function(spec, 0, mid);
      c.plus = V.radial_value(mid) * region_weight(g, d) >= beta;
      const double meas = g * (c.hi - c.lo);
      (c.plus ? out.measure_plus : out.measure_minus) += meas;
      out.cells.push_back(c);
    }
  }
  return out;
}

namespace {

// integral over the tree of f(V(x), g0(|x|)) dx; radial potentials integrate
// radially with multiplicity g0, per-edge tabulations sum edge by edge.
// The radial range extends adaptively on a geometric ladder until the tail
// has visibly converged or the representation ends (a conservative, never
// overshooting treatment for the upper-bound right sides).
double integrate_tree(const TreeSpec& spec, const PotentialSpec& V, double r_core,
                      const std::function<double(double, double)>& f,
                      double cells_per_unit, bool* divergent) {
  if (divergent) *divergent = false;
  double total = 0.0;
  if (V.is_radial()) {
    const double stop_cap = std::min(spec.horizon_radius, 1e9);
    std::vector<double> marks{0.0};
    for (double r : spec.radii)
      if (r > 0.0 && r < stop_cap) marks.push_back(r);
    for (double r : V.table_r)
      if (r > 0.0 && r < stop_cap) marks.push_back(r);
    for (double r = std::max(1.0, r_core / 16.0); r < stop_cap; r *= 1.0625)
      marks.push_back(r);
    if (stop_cap > marks.back()) marks.push_back(stop_cap);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    double chunk = 0.0;
    bool stopped = false;
    for (size_t k = 0; k + 1 < marks.size(); ++k) {
      const double lo = marks[k], hi = marks[k + 1];
      const int m = std::clamp(static_cast<int>(std::ceil((hi - lo) * cells_per_unit)), 4, 512);
      const double g = branching_function(spec, 0, 0.5 * (lo + hi));
      double piece = 0.0;
      for (int i = 0; i < m; ++i) {
        const double x0 = lo + (hi - lo) * i / m;
        const double x1 = lo + (hi - lo) * (i + 1) / m;
        const double xm = 0.5 * (x0 + x1);
        piece += (x1 - x0) / 6.0 *
                 (f(V.radial_value(x0), g) + 4.0 * f(V.radial_value(xm), g) +
                  f(V.radial_value(x1), g));
      }
      total += g * piece;
      chunk = g * piece;
      if (lo > std::max(r_core, 64.0) && chunk < 1e-13 * std::max(total, 1e-300)) {
        stopped = true;
        break;
      }
    }
    if (divergent && !stopped && chunk > 1e-8 * std::max(total, 1e-300)) *divergent = true;
    return total;
  }
  // per-edge tabulation: trapezoid over each edge's samples
  for (const auto& [path, tab] : V.edges) {
    for (size_t i = 0; i + 1 < tab.size(); ++i) {
      const double r0 = tab[i].first, r1 = tab[i + 1].first;
      const double g = 1.0;  // each tabulated edge is a single strand
      total += 0.5 * (r1 - r0) * (f(tab[i].second, g) + f(tab[i + 1].second, g));
    }
  }
  return total;
}

// exact antiderivative of t^a (tV - beta) on [lo, hi] (hi may be inf)
double power_piece(double a, double V, double beta, double lo, double hi) {
  auto anti = [&](double t) {
    double s1, s2;
    if (std::abs(a + 2.0) < 1e-14)
      s1 = V * std::log(t);
    else
      s1 = V * std::pow(t, a + 2.0) / (a + 2.0);
    if (std::abs(a + 1.0) < 1e-14)
      s2 = -beta * std::log(t);
    else
      s2 = -beta * std::pow(t, a + 1.0) / (a + 1.0);
    return s1 + s2;
  };
  if (std::isinf(hi)) {
    if (a + 2.0 >= 0.0) return std::numeric_limits<double>::infinity();
    return -anti(lo);
  }
  if (hi <= lo) return 0.0;
  return anti(hi) - anti(lo);
}

}  // namespace

RhsResult bound_rhs(RhsKind kind, const TreeSpec& spec, const PotentialSpec& V,
                    const BoundParams& p, const SolverConfig& cfg, double C_envelope) {
  V.validate();
  RhsResult out;
  const double inf = std::numeric_limits<double>::infinity();
  // integration range: extend until the integrand has visibly decayed
  double r_core = std::min(spec.horizon_radius, std::max(4.0 * cfg.domain_cut, 256.0));
  const double gamma = p.gamma, beta = p.beta, d = p.d;

  switch (kind) {
    case RhsKind::half_sharp: {
      bool div = false;
      out.value = integrate_tree(spec, V, r_core, [](double v, double) { return v; }, 64.0, &div);
      out.divergent = div;
      return out;
    }
    case RhsKind::half_small: {
      if (!(d > 1.0)) throw std::invalid_argument("half_small: d > 1 required");
      const double M = m_constant(beta, 0.5);
      const double c = 4.0 * M * C_envelope * std::pow(beta, (1.0 - d) / 2.0) / (d * d - 1.0);
      bool div = false;
      const double integral = integrate_tree(
          spec, V, r_core,
          [d](double v, double g) { return std::pow(v, (1.0 + d) / 2.0) * g; }, 64.0, &div);
      out.value = c * integral;
      out.divergent = div;
      return out;
    }
    case RhsKind::two_term_1:
    case RhsKind::two_term_2: {
      if (kind == RhsKind::two_term_1 && !(gamma >= 0.5 - 1e-14))
        throw std::invalid_argument("two-term item (1): gamma >= 1/2 required");
      if (kind == RhsKind::two_term_2) {
        const bool ok = (d > 2.0) ? (gamma >= 0.0 && gamma <= 0.5 + 1e-14)
                                  : (d > 1.0 && gamma > 1.0 - d / 2.0 && gamma <= 0.5 + 1e-14);
        if (!ok) throw std::invalid_argument("two-term item (2): gamma out of admissible range");
      }
      auto [L, Lt] = two_term_constants(beta, gamma, d, C_envelope);
      bool div1 = false, div2 = false;
      const double term1 = integrate_tree(
          spec, V, r_core,
          [&](double v, double g) {
            const bool minus = v * region_weight(g, d) < beta;
            return minus ? std::pow(v, gamma + d / 2.0) * g : 0.0;
          },
          64.0, &div1);
      double term2;
      if (kind == RhsKind::two_term_1) {
        term2 = integrate_tree(
            spec, V, r_core,
            [&](double v, double g) {
              const bool minus = v * region_weight(g, d) < beta;
              return minus ? 0.0 : std::pow(v, gamma + 0.5);
            },
            64.0, &div2);
      } else {
        term2 = integrate_tree(
            spec, V, r_core,
            [&](double v, double g) {
              const bool minus = v * region_weight(g, d) < beta;
              return minus ? 0.0 : v * std::pow(g, (1.0 - 2.0 * gamma) / (d - 1.0));
            },
            64.0, &div2);
      }
      out.value = L * term1 + Lt * term2;
      out.divergent = div1 || div2;
      return out;
    }
    case RhsKind::lt_ext: {
      BoundConstants c = bound_constants(ConstantKind::lt_ext, p, C_envelope);
      bool div = false;
      const double integral = integrate_tree(
          spec, V, r_core,
          [&](double v, double g) {
            return std::pow(v, gamma + (p.a + 1.0) / 2.0) * std::pow(g, p.a / (d - 1.0));
          },
          64.0, &div);
      out.value = c.K * integral;
      out.divergent = div;
      return out;
    }
    case RhsKind::homogeneous: {
      // Lieb-type bound against the shifted kernel envelope
      // C_b e^{-lambda_b t} t^{-3/2} (1+|x|)^2; the exact t-integral of
      // t^{-gamma-5/2}(tV-beta)_+ is V^{gamma+3/2} beta^{-gamma-1/2} / ((gamma+1/2)(gamma+3/2))
      const double M = m_constant(beta, gamma);
      const double tint = 1.0 / ((gamma + 0.5) * (gamma + 1.5));
      if (!V.is_radial())
        throw std::invalid_argument("homogeneous RHS implemented for radial potentials");
      double total = 0.0;
      std::vector<double> marks{0.0, r_core};
      for (double r : spec.radii)
        if (r > 0.0 && r < r_core) marks.push_back(r);
      std::sort(marks.begin(), marks.end());
      for (size_t k = 0; k + 1 < marks.size(); ++k) {
        const double lo = marks[k], hi = marks[k + 1];
        const int m = std::max(4, static_cast<int>(std::ceil((hi - lo) * 64.0)));
        const double g = branching_function(spec, 0, 0.5 * (lo + hi));
        auto f = [&](double r) {
          return std::pow(V.radial_value(r), gamma + 1.5) * (1.0 + r) * (1.0 + r);
        };
        double piece = 0.0;
        for (int i = 0; i < m; ++i) {
          const double x0 = lo + (hi - lo) * i / m;
          const double x1 = lo + (hi - lo) * (i + 1) / m;
          piece += (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
        }
        total += g * piece;
      }
      out.value = M * C_envelope * std::pow(beta, -gamma - 0.5) * tint * total;
      return out;
    }
    case RhsKind::lieb: {
      if (!V.is_radial())
        throw std::invalid_argument("lieb RHS implemented for radial potentials");
      const double M = m_constant(beta, gamma);
      const double invsqrtpi = 1.0 / std::sqrt(std::numbers::pi);
      // x-integral of the exact t-antiderivatives of the kernel envelope
      // min((pi t)^{-1/2}, C t^{-d/2} g0) times t^{-1-gamma}(tV - beta)_+
      std::vector<double> marks{0.0, r_core};
      for (double r : spec.radii)
        if (r > 0.0 && r < r_core) marks.push_back(r);
      std::sort(marks.begin(), marks.end());
      double total = 0.0;
      bool divergent = false;
      for (size_t k = 0; k + 1 < marks.size() && !divergent; ++k) {
        const double lo = marks[k], hi = marks[k + 1];
        const int m = std::max(4, static_cast<int>(std::ceil((hi - lo) * 64.0)));
        const double g = branching_function(spec, 0, 0.5 * (lo + hi));
        const double tstar = region_weight(g, d);  // g0^{2/(d-1)}
        auto tintegral = [&](double r) {
          const double v = V.radial_value(r);
          if (v <= 0.0) return 0.0;
          const double t0 = beta / v;
          double acc = 0.0;
          const double p1 = power_piece(-1.5 - gamma, v, beta, std::max(t0, 1e-300),
                                        std::max(tstar, t0));
          acc += invsqrtpi * std::max(p1, 0.0);
          const double p2 =
              power_piece(-1.0 - d / 2.0 - gamma, v, beta, std::max(tstar, t0), inf);
          if (std::isinf(p2)) {
            divergent = true;
            return 0.0;
          }
          acc += C_envelope * g * std::max(p2, 0.0);
          return acc;
        };
        double piece = 0.0;
        for (int i = 0; i < m; ++i) {
          const double x0 = lo + (hi - lo) * i / m;
          const double x1 = lo + (hi - lo) * (i + 1) / m;
          piece += (x1 - x0) / 6.0 *
                   (tintegral(x0) + 4.0 * tintegral(0.5 * (x0 + x1)) + tintegral(x1));
        }
        total += g * piece;
      }
      out.value = M * total;
      out.divergent = divergent;
      return out;
    }
  }
  return out;
}

double hardy_constant(const TreeSpec& spec, const SolverConfig& cfg) {
  int lmax = 0;
  while (lmax + 1 <= spec.generations() && spec.radii[lmax + 1] < cfg.domain_cut) ++lmax;
  auto nonneg = [&](double C) {
    for (int l = 0; l <= lmax; ++l) {
      RadialPotential hardy = [C](double r) { return C / (1.0 + r * r); };
      RadialSystem sys = discretize_radial(spec, l, cfg, hardy);
      if (sys.lambda1() < -1e-12) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 4.0;
  if (!nonneg(lo + 1e-6)) return 0.0;
  while (nonneg(hi) && hi < 1024.0) hi *= 2.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (nonneg(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace treeheat

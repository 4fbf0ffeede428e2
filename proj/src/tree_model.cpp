#include "treeheat/tree_model.hpp"

#include <algorithm>
#include <cmath>

namespace treeheat {

void TreeSpec::validate() {
  if (radii.empty() || branchings.size() != radii.size())
    throw std::invalid_argument("tree: radii and branchings must be nonempty and aligned");
  if (radii[0] != 0.0) throw std::invalid_argument("tree: r_0 must be 0");
  if (branchings[0] != 1) throw std::invalid_argument("tree: b_0 must be 1");
  for (size_t l = 1; l < radii.size(); ++l) {
    if (!(radii[l] > radii[l - 1]))
      throw std::invalid_argument("tree: radii must be strictly increasing");
    if (branchings[l] < 2)
      throw std::invalid_argument("tree: b_l must be >= 2 for l >= 1");
  }
  if (tail == TailModel::polynomial && !(tail_dimension > 1.0))
    throw std::invalid_argument("tree: polynomial tail needs dimension > 1");
  if (tail == TailModel::exponential && tail_branching < 2)
    throw std::invalid_argument("tree: exponential tail needs branching >= 2");
  cumg.resize(radii.size());
  cumg[0] = 1.0;
  for (size_t l = 1; l < radii.size(); ++l) cumg[l] = cumg[l - 1] * branchings[l];
  cumint.resize(radii.size());
  cumint[0] = 0.0;
  for (size_t l = 1; l < radii.size(); ++l)
    cumint[l] = cumint[l - 1] + cumg[l - 1] * (radii[l] - radii[l - 1]);
}

TreeSpec explicit_tree(std::vector<double> radii, std::vector<int> branchings, std::string name) {
  TreeSpec t;
  t.radii = std::move(radii);
  t.branchings = std::move(branchings);
  t.tail = TailModel::truncated;
  t.name = std::move(name);
  t.validate();
  return t;
}

TreeSpec homogeneous_tree(int b, double horizon_radius, std::string name) {
  if (b < 2) throw std::invalid_argument("homogeneous_tree: b >= 2 required");
  if (!(horizon_radius >= 1.0)) throw std::invalid_argument("homogeneous_tree: horizon too small");
  TreeSpec t;
  t.radii.push_back(0.0);
  t.branchings.push_back(1);
  for (int j = 1; j <= static_cast<int>(std::floor(horizon_radius)); ++j) {
    t.radii.push_back(static_cast<double>(j));
    t.branchings.push_back(b);
  }
  t.tail = TailModel::exponential;
  t.tail_branching = b;
  t.horizon_radius = horizon_radius;
  t.name = name.empty() ? ("homogeneous-b" + std::to_string(b)) : std::move(name);
  t.validate();
  return t;
}

TreeSpec dyadic_tree(double d, double horizon_radius, std::string name) {
  if (!(d > 1.0)) throw std::invalid_argument("dyadic_tree: d > 1 required");
  TreeSpec t;
  t.radii.push_back(0.0);
  t.branchings.push_back(1);
  for (int l = 1;; ++l) {
    const double r = std::exp2(static_cast<double>(l) / (d - 1.0)) - 1.0;
    if (r > horizon_radius) break;
    t.radii.push_back(r);
    t.branchings.push_back(2);
  }
  if (t.radii.size() < 2) throw std::invalid_argument("dyadic_tree: horizon too small");
  t.tail = TailModel::polynomial;
  t.tail_dimension = d;
  t.horizon_radius = horizon_radius;
  t.name = name.empty() ? ("dyadic-d" + std::to_string(static_cast<int>(std::lround(d)))) : std::move(name);
  t.validate();
  return t;
}

namespace {

void check_radius(const TreeSpec& spec, double r) {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (r > spec.horizon_radius)
    throw horizon_error("radius " + std::to_string(r) + " exceeds tree horizon");
}

// largest l with r_l < r (generation of the piece (r_l, r_{l+1}] containing r); 0 at r = 0
int gen_strictly_below(const TreeSpec& spec, double r) {
  auto it = std::lower_bound(spec.radii.begin(), spec.radii.end(), r);
  // it points to first r_l >= r
  int idx = static_cast<int>(it - spec.radii.begin()) - 1;
  return std::max(idx, 0);
}

// largest l with r_l <= r
int gen_at_or_below(const TreeSpec& spec, double r) {
  auto it = std::upper_bound(spec.radii.begin(), spec.radii.end(), r);
  return static_cast<int>(it - spec.radii.begin()) - 1;
}

}  // namespace

int generation_at(const TreeSpec& spec, double r) {
  check_radius(spec, r);
  return gen_strictly_below(spec, r);
}

double branching_function(const TreeSpec& spec, int l, double r) {
  check_radius(spec, r);
  if (l < 0) throw std::invalid_argument("generation index must be >= 0");
  if (l == 0) return spec.cumg[gen_strictly_below(spec, r)];
  if (l > spec.generations())
    throw std::invalid_argument("generation index beyond represented horizon");
  if (r < spec.radii[l]) return 0.0;
  const int n = gen_at_or_below(spec, r);
  return spec.cumg[n] / spec.cumg[l];
}

double g0_left(const TreeSpec& spec, double r) {
  check_radius(spec, r);
  return spec.cumg[gen_strictly_below(spec, r)];
}

double g0_right(const TreeSpec& spec, double r) {
  check_radius(spec, r);
  return spec.cumg[gen_at_or_below(spec, r)];
}

double generation_multiplicity(const TreeSpec& spec, int l) {
  if (l < 0 || l > spec.generations())
    throw std::invalid_argument("generation index out of range");
  if (l == 0) return 1.0;
  return spec.cumg[l - 1] * (spec.branchings[l] - 1);
}

double integral_g0(const TreeSpec& spec, double a, double b) {
  if (a < 0.0 || b < a) throw std::invalid_argument("integral_g0: bad interval");
  check_radius(spec, b);
  auto upto = [&](double r) {
    const int l = gen_strictly_below(spec, r);
    return spec.cumint[l] + spec.cumg[l] * (r - spec.radii[l]);
  };
  return upto(b) - upto(a);
}

double cointegral_inv_g0(const TreeSpec& spec, double r) {
  check_radius(spec, r);
  const double inf = std::numeric_limits<double>::infinity();
  const int L = spec.generations();
  double acc = 0.0;
  int l = gen_strictly_below(spec, r);
  double pos = r;
  while (l < L) {
    acc += (spec.radii[l + 1] - pos) / spec.cumg[l];
    pos = spec.radii[l + 1];
    ++l;
  }
  // past the last materialized vertex r_L; pos is in [r_L, horizon]
  switch (spec.tail) {
    case TailModel::truncated:
      return inf;  // constant weight, divergent co-integral
    case TailModel::exponential: {
      // unit edges, piece (J+k, J+k+1) has weight b^(J+k)
      const double b = spec.tail_branching;
      const double J = spec.radii[L];
      const double wJ = spec.cumg[L];
      acc += (J + 1.0 - pos) / wJ;            // rest of the current piece
      acc += (1.0 / (wJ * (b - 1.0)));        // sum_{k>=1} 1/(wJ b^k)
      return acc;
    }
    case TailModel::polynomial: {
      const double d = spec.tail_dimension;
      if (d <= 2.0) return inf;
      // piece (r_k, r_{k+1}) with r_k = 2^{k/(d-1)} - 1 and weight 2^k:
      // len_k / 2^k = c * q^k, c = 2^{1/(d-1)} - 1, q = 2^{(2-d)/(d-1)} < 1
      const double c = std::exp2(1.0 / (d - 1.0)) - 1.0;
      const double q = std::exp2((2.0 - d) / (d - 1.0));
      const double qL = std::pow(q, static_cast<double>(L));
      acc += c * qL / (1.0 - q);              // full pieces from r_L onward
      acc -= (pos - spec.radii[L]) / spec.cumg[L];  // minus the part below pos
      return acc;
    }
  }
  return inf;
}

double ball_volume(const TreeSpec& spec, double z, double r) {
  if (z < 0.0 || r <= 0.0) throw std::invalid_argument("ball_volume: need z >= 0, r > 0");
  return integral_g0(spec, std::max(z - r, 0.0), z + r);
}

PointAddress point_at(const TreeSpec& spec, std::vector<int> path, double radial) {
  PointAddress x{std::move(path), radial};
  validate_point(spec, x);
  return x;
}

void validate_point(const TreeSpec& spec, const PointAddress& x) {
  check_radius(spec, x.radial);
  const int j = static_cast<int>(x.path.size());
  if (j > spec.generations())
    throw std::invalid_argument("point path deeper than represented horizon");
  for (int i = 1; i <= j; ++i) {
    if (x.path[i - 1] < 1 || x.path[i - 1] > spec.branchings[i])
      throw std::invalid_argument("point path entry out of branching range");
  }
  const double lo = spec.radii[j];
  const double hi = (j + 1 <= spec.generations()) ? spec.radii[j + 1] : spec.horizon_radius;
  const bool ok = (j == 0) ? (x.radial >= 0.0 && x.radial <= hi)
                           : (x.radial > lo && x.radial <= hi);
  if (!ok) throw std::invalid_argument("point radial coordinate inconsistent with path depth");
}

RadialWeightFn tree_weight(const TreeSpec& spec) {
  RadialWeightFn w;
  w.value = [&spec](double r) { return g0_right(spec, r); };
  w.value_left = [&spec](double r) { return g0_left(spec, r); };
  w.integral0 = [&spec](double r) { return integral_g0(spec, 0.0, r); };
  w.cointegral_inv = [&spec](double r) { return cointegral_inv_g0(spec, r); };
  w.breakpoints.assign(spec.radii.begin() + 1, spec.radii.end());
  return w;
}

double sobolev_tilde_factor(double delta) {
  if (!(delta > 2.0)) throw std::invalid_argument("delta must exceed 2");
  return std::pow(std::pow(delta - 2.0, delta - 2.0) * std::pow(delta, delta) /
                      std::pow(2.0 * (delta - 1.0), 2.0 * (delta - 1.0)),
                  1.0 / delta);
}

namespace {

// Deterministic golden-section polish of a 1-d maximum bracketed by grid neighbors.
template <typename F>
double refine_max(F&& f, double a, double b, int iters = 80) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return std::max(fc, fd);
}

}  // namespace

double sobolev_constant_scan(const RadialWeightFn& w, double delta, double r_max,
                             int n_scan, bool* divergent, double* sup_at) {
  if (!(delta > 2.0)) throw std::invalid_argument("delta must exceed 2");
  if (n_scan < 100) throw std::invalid_argument("n_scan must be >= 100");
  if (divergent) *divergent = false;
  if (std::isinf(w.cointegral_inv(0.0))) {
    if (divergent) *divergent = true;
    if (sup_at) *sup_at = 0.0;
    return 0.0;
  }
  const double ex = (delta - 2.0) / delta;
  auto F = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::pow(w.integral0(r), ex) * w.cointegral_inv(r);
  };
  std::vector<double> cand;
  cand.reserve(n_scan + w.breakpoints.size() + 2);
  for (int i = 1; i <= n_scan; ++i) cand.push_back(r_max * i / n_scan);
  for (double b : w.breakpoints)
    if (b > 0.0 && b <= r_max) cand.push_back(b);
  std::sort(cand.begin(), cand.end());
  double best = 0.0, at = 0.0;
  size_t besti = 0;
  for (size_t i = 0; i < cand.size(); ++i) {
    const double v = F(cand[i]);
    if (v > best) {
      best = v;
      at = cand[i];
      besti = i;
    }
  }
  const double lo = besti > 0 ? cand[besti - 1] : 0.0;
  const double hi = besti + 1 < cand.size() ? cand[besti + 1] : r_max;
  best = std::max(best, refine_max(F, lo, hi));
  if (sup_at) *sup_at = at;
  if (best <= 0.0) {
    if (divergent) *divergent = true;
    return 0.0;
  }
  return 1.0 / best;
}

GeometryReport geometry_scan(const TreeSpec& spec, double d, double delta,
                             double r_max, int n_scan) {
  if (!(d >= 1.0)) throw std::invalid_argument("dimension must be >= 1");
  if (!(delta > 2.0)) throw std::invalid_argument("delta must exceed 2");
  if (n_scan < 100) throw std::invalid_argument("n_scan must be >= 100");
  if (r_max > spec.horizon_radius) throw horizon_error("scan range exceeds tree horizon");

  GeometryReport rep;
  rep.scan_r_max = r_max;
  rep.grid_step = r_max / n_scan;

  // candidate radii: uniform grid plus both one-sided limits at breakpoints
  // (extrema of ratios of piecewise-constant functions sit at breakpoints)
  auto candidates = [&](double lo, double hi) {
    std::vector<double> c;
    for (int i = 0; i <= n_scan; ++i) {
      const double r = lo + (hi - lo) * i / n_scan;
      if (r > 0.0) c.push_back(r);
    }
    for (double b : spec.radii)
      if (b > lo && b <= hi) c.push_back(b);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  };

  // doubling constant: sup g0(2r)/g0(r) on (0, r_max/2]
  {
    double best = 0.0;
    // also include halves of breakpoints, where 2r crosses a vertex
    std::vector<double> c = candidates(0.0, r_max / 2.0);
    for (double b : spec.radii)
      if (b / 2.0 > 0.0 && b / 2.0 <= r_max / 2.0) c.push_back(b / 2.0);
    std::sort(c.begin(), c.end());
    for (double r : c) {
      for (double num : {g0_left(spec, 2.0 * r), g0_right(spec, 2.0 * r)})
        for (double den : {g0_left(spec, r), g0_right(spec, r)})
          best = std::max(best, num / den);
    }
    rep.doubling_constant = best;
  }

  // dimension bounds: inf/sup of g0(r)/(1+r)^(d-1) over [0, r_max]
  {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    auto ratio = [&](double g, double r) { return g / std::pow(1.0 + r, d - 1.0); };
    lo = std::min(lo, ratio(1.0, 0.0));
    hi = std::max(hi, ratio(1.0, 0.0));
    for (double r : candidates(0.0, r_max)) {
      for (double g : {g0_left(spec, r), g0_right(spec, r)}) {
        lo = std::min(lo, ratio(g, r));
        hi = std::max(hi, ratio(g, r));
      }
    }
    rep.dim_inf = lo;
    rep.dim_sup = hi;
    // flag growth that the polynomial envelope cannot follow: the windowed
    // sup over the outer half keeps exceeding the inner-half sup
    double hi_inner = 0.0;
    for (double r : candidates(0.0, r_max / 2.0))
      hi_inner = std::max(hi_inner, ratio(g0_right(spec, r), r));
    rep.non_polynomial_growth = hi > 2.0 * hi_inner;
  }

  {
    bool div = false;
    double at = 0.0;
    rep.sobolev_S = sobolev_constant_scan(tree_weight(spec), delta, r_max, n_scan, &div, &at);
    rep.sobolev_divergent = div;
    rep.sobolev_sup_at = at;
    rep.sobolev_S_tilde = sobolev_tilde_factor(delta) * rep.sobolev_S;
  }
  return rep;
}

}  // namespace treeheat

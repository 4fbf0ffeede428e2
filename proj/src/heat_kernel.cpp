#include "treeheat/heat_kernel.hpp"

#include <cmath>
#include <numbers>

namespace treeheat {

namespace {

void validate_channel(const TreeSpec& spec, const ChannelIndex& ch) {
  if (ch.l < 0 || ch.l > spec.generations())
    throw std::invalid_argument("channel: generation out of range");
  if (ch.l == 0) {
    if (!ch.vertex.empty() || ch.sigma != 1)
      throw std::invalid_argument("channel: l = 0 admits only the (o, 1) channel");
    return;
  }
  if (static_cast<int>(ch.vertex.size()) != ch.l - 1)
    throw std::invalid_argument("channel: vertex address must have l - 1 branch choices");
  for (int i = 1; i < ch.l; ++i)
    if (ch.vertex[i - 1] < 1 || ch.vertex[i - 1] > spec.branchings[i])
      throw std::invalid_argument("channel: vertex address entry out of range");
  if (ch.sigma < 1 || ch.sigma > spec.branchings[ch.l] - 1)
    throw std::invalid_argument("channel: sigma out of range");
}

int common_prefix(const std::vector<int>& a, const std::vector<int>& b) {
  int n = 0;
  const int m = static_cast<int>(std::min(a.size(), b.size()));
  while (n < m && a[n] == b[n]) ++n;
  return n;
}

double truncation_bound(double R, double reach, double t) {
  const double gap = R - reach;
  return gap > 0.0 ? std::exp(-gap * gap / (4.0 * t)) : 1.0;
}

}  // namespace

std::complex<double> y_eval(const TreeSpec& spec, const ChannelIndex& ch,
                            const PointAddress& x) {
  validate_channel(spec, ch);
  validate_point(spec, x);
  if (ch.l == 0) return {1.0 / std::sqrt(branching_function(spec, 0, x.radial)), 0.0};
  // support: x must lie strictly beyond r_l inside the subtree rooted at v
  if (static_cast<int>(x.path.size()) < ch.l) return {0.0, 0.0};
  for (int i = 0; i < ch.l - 1; ++i)
    if (x.path[i] != ch.vertex[i]) return {0.0, 0.0};
  const int bl = spec.branchings[ch.l];
  const double gl = branching_function(spec, ch.l, x.radial);
  if (gl <= 0.0) return {0.0, 0.0};
  const int m = x.path[ch.l - 1];
  const double arg = 2.0 * std::numbers::pi * m * ch.sigma / bl;
  return std::polar(1.0 / std::sqrt(bl * gl), arg);
}

HeatKernelEvaluator::HeatKernelEvaluator(const TreeSpec& spec, const SolverConfig& cfg)
    : spec_(&spec), cfg_(cfg) {
  cfg.validate();
  int lmax = 0;
  while (lmax + 1 <= spec.generations() && spec.radii[lmax + 1] < cfg.domain_cut) ++lmax;
  slots_ = std::vector<Slot>(lmax + 1);
}

const RadialSystem& HeatKernelEvaluator::system(int l) const {
  Slot& slot = slots_.at(l);
  std::call_once(slot.built, [&] {
    slot.sys = std::make_unique<RadialSystem>(discretize_radial(*spec_, l, cfg_));
  });
  return *slot.sys;
}

int HeatKernelEvaluator::contributing_channels(const PointAddress& x,
                                               const PointAddress& y) const {
  const int jx = static_cast<int>(x.path.size());
  const int jy = static_cast<int>(y.path.size());
  const int lcp = common_prefix(x.path, y.path);
  return std::min({jx, jy, lcp + 1});
}

KernelSample HeatKernelEvaluator::diagonal(const PointAddress& x, double t) const {
  validate_point(*spec_, x);
  const double r = x.radial;
  if (r + 6.0 * std::sqrt(t) > cfg_.domain_cut + 1e-12)
    throw truncation_error("diagonal_kernel: truncation insufficient");
  double val = system(0).kernel(r, r, t);
  const int J = static_cast<int>(x.path.size());
  for (int l = 1; l <= J; ++l) {
    const double bl = spec_->branchings[l];
    val += (bl - 1.0) / bl * system(l).kernel(r, r, t);
  }
  KernelSample out;
  out.x = x;
  out.y = x;
  out.t = t;
  out.value = std::max(val, 0.0);
  out.channels_used = J + 1;
  out.truncation_error_bound = truncation_bound(cfg_.domain_cut, r, t);
  return out;
}

KernelSample HeatKernelEvaluator::full(const PointAddress& x, const PointAddress& y,
                                       double t) const {
  validate_point(*spec_, x);
  validate_point(*spec_, y);
  const double rx = x.radial, ry = y.radial;
  if (std::max(rx, ry) + 6.0 * std::sqrt(t) > cfg_.domain_cut + 1e-12)
    throw truncation_error("full_kernel: truncation insufficient");

  // literal channel sum of the decomposition: only channels whose vertex is
  // a common ancestor have both Y factors nonzero, which restricts l to
  // 1..min(depths, lcp + 1) with a unique vertex per l
  std::complex<double> acc(system(0).kernel(rx, ry, t), 0.0);
  double scale = std::abs(acc.real());
  const int lmax = contributing_channels(x, y);
  for (int l = 1; l <= lmax; ++l) {
    const int bl = spec_->branchings[l];
    const double kl = system(l).kernel(rx, ry, t);
    const int m = x.path[l - 1], mp = y.path[l - 1];
    std::complex<double> phase_sum(0.0, 0.0);
    for (int sigma = 1; sigma <= bl - 1; ++sigma) {
      const double arg = 2.0 * std::numbers::pi * sigma * (m - mp) / bl;
      phase_sum += std::polar(1.0, arg);
    }
    acc += phase_sum * (kl / bl);
    scale += std::abs(kl);
  }
  if (std::abs(acc.imag()) > 1e-12 * (scale + 1e-300))
    throw std::logic_error("full_kernel: imaginary residue above tolerance");

  KernelSample out;
  out.x = x;
  out.y = y;
  out.t = t;
  out.value = std::max(acc.real(), 0.0);
  out.channels_used = lmax + 1;
  out.truncation_error_bound = truncation_bound(cfg_.domain_cut, std::max(rx, ry), t);
  return out;
}

KernelSample diagonal_kernel(const TreeSpec& spec, const SolverConfig& cfg,
                             const PointAddress& x, double t) {
  return HeatKernelEvaluator(spec, cfg).diagonal(x, t);
}

KernelSample full_kernel(const TreeSpec& spec, const SolverConfig& cfg,
                         const PointAddress& x, const PointAddress& y, double t) {
  return HeatKernelEvaluator(spec, cfg).full(x, y, t);
}

}  // namespace treeheat

#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "treeheat/radial_solver.hpp"
#include "treeheat/tree_model.hpp"

namespace treeheat {

/// One partial-wave channel: generation l, the generation-l vertex it is
/// attached to (addressed by the l-1 branch choices leading to it), and the
/// phase index sigma (1..b_l - 1; the single l = 0 channel has sigma = 1).
struct ChannelIndex {
  int l = 0;
  std::vector<int> vertex;
  int sigma = 1;
};

std::complex<double> y_eval(const TreeSpec& spec, const ChannelIndex& ch,
                            const PointAddress& x);

struct KernelSample {
  PointAddress x;
  PointAddress y;
  double t = 0.0;
  double value = 0.0;
  int channels_used = 0;
  double truncation_error_bound = 0.0;
};

/// Synthesizes tree heat-kernel values from the radial channel systems.
/// Channel systems are built on first use (under a lock) and immutable
/// afterwards; evaluations are pure and may run concurrently.
class HeatKernelEvaluator {
public:
  HeatKernelEvaluator(const TreeSpec& spec, const SolverConfig& cfg);

  KernelSample diagonal(const PointAddress& x, double t) const;
  KernelSample full(const PointAddress& x, const PointAddress& y, double t) const;

  const RadialSystem& system(int l) const;
  int max_channel() const { return static_cast<int>(slots_.size()) - 1; }
  const TreeSpec& tree() const { return *spec_; }
  const SolverConfig& config() const { return cfg_; }

  /// Number of contributing channel generations for a pair (combinatorial).
  int contributing_channels(const PointAddress& x, const PointAddress& y) const;

private:
  struct Slot {
    std::once_flag built;
    std::unique_ptr<RadialSystem> sys;
  };
  const TreeSpec* spec_;
  SolverConfig cfg_;
  mutable std::vector<Slot> slots_;
};

KernelSample diagonal_kernel(const TreeSpec& spec, const SolverConfig& cfg,
                             const PointAddress& x, double t);
KernelSample full_kernel(const TreeSpec& spec, const SolverConfig& cfg,
                         const PointAddress& x, const PointAddress& y, double t);

}  // namespace treeheat

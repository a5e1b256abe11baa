#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace oplab {

enum class LocalKernelKind { Uniform, Triangular, Exponential, StateExponential };

// Agent-level interaction kernel. Every kind carries the hard cutoff at the
// confidence radius; the comparison is inclusive, so exact-boundary ties
// interact. The triangular kernel returns eps - d un-normalized (the
// normalization constant absorbs the scale).
struct LocalKernelSpec {
  LocalKernelKind kind = LocalKernelKind::Uniform;
  double gamma = 1.0;  // decay rate; slope of gamma_fn for StateExponential
  double alpha = 1.0;  // distance exponent for the exponential families

  // StateExponential: monotone map of |x_i| with gamma_fn(0) = 0. Defaults
  // to the linear ramp gamma * u; scenario files can only express the ramp.
  std::function<double(double)> gamma_fn;

  double state_gamma(double u) const {
    return gamma_fn ? gamma_fn(u) : gamma * u;
  }
};

double eval_local(const LocalKernelSpec& k, double x_i, double x_j,
                  double eps);

enum class ThresholdMode { None, Above, Below };

// Gamma(t) = gamma + rate * t, nondecreasing.
struct GammaSchedule {
  double rate = 0.0;
};

// Ordered influence pair: agents of `target` weighing neighbors of `source`.
struct GroupPair {
  int source = 0;
  int target = 0;
  friend bool operator==(const GroupPair&, const GroupPair&) = default;
};

// Unordered pair of groups whose W1 drives a threshold test.
struct GatePair {
  int a = 0;
  int b = 0;
  friend bool operator==(const GatePair&, const GatePair&) = default;
};

// Population-level kernel: exp(-Gamma(t) * W1) with optional threshold
// cutoffs, time-decay schedule and an asymmetry mask. When a mask is set,
// the kernel applies only to listed (source -> target) pairs; every other
// pair evaluates to the in-group default (1 when same group, else 0).
// threshold_gate redirects the threshold test to another pair's W1, leaving
// the decay factor on the pair's own distance.
struct PopulationKernelSpec {
  double gamma = 0.0;
  ThresholdMode threshold = ThresholdMode::None;
  double sigma = 0.0;
  std::optional<GammaSchedule> schedule;
  std::optional<std::vector<GroupPair>> mask;
  std::optional<GatePair> threshold_gate;

  double gamma_at(double t) const {
    return schedule ? gamma + schedule->rate * t : gamma;
  }

  bool applies(int source_group, int target_group) const {
    if (!mask) return true;
    for (const auto& p : *mask) {
      if (p.source == source_group && p.target == target_group) return true;
    }
    return false;
  }
};

// Kernel value for two groups at W1 distance w. Threshold cutoffs act on
// cross-group pairs only; a group is never cut from itself (w = 0 there, so
// the value is exp(0) = 1).
double eval_population(const PopulationKernelSpec& spec, double w, double t,
                       bool same_group);

// Engine entry point: per-agent threshold sigma and a possibly redirected
// gate distance.
double eval_population_ex(const PopulationKernelSpec& spec, double w,
                          double gate_w, double sigma, double t,
                          bool same_group);

}  // namespace oplab

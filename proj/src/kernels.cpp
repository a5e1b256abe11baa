#include "oplab/kernels.hpp"

#include <cmath>

namespace oplab {

namespace {

double dist_pow(double d, double alpha) {
  if (alpha == 1.0) return d;
  if (alpha == 2.0) return d * d;
  return std::pow(d, alpha);
}

}  // namespace

double eval_local(const LocalKernelSpec& k, double x_i, double x_j,
                  double eps) {
  const double d = std::abs(x_i - x_j);
  if (d > eps) return 0.0;
  switch (k.kind) {
    case LocalKernelKind::Uniform:
      return 1.0;
    case LocalKernelKind::Triangular:
      return eps - d;
    case LocalKernelKind::Exponential:
      return std::exp(-k.gamma * dist_pow(d, k.alpha));
    case LocalKernelKind::StateExponential:
      return std::exp(-k.state_gamma(std::abs(x_i)) * dist_pow(d, k.alpha));
  }
  return 0.0;
}

double eval_population_ex(const PopulationKernelSpec& spec, double w,
                          double gate_w, double sigma, double t,
                          bool same_group) {
  if (!same_group) {
    if (spec.threshold == ThresholdMode::Above && gate_w > sigma) return 0.0;
    if (spec.threshold == ThresholdMode::Below && gate_w <= sigma) return 0.0;
  }
  return std::exp(-spec.gamma_at(t) * w);
}

double eval_population(const PopulationKernelSpec& spec, double w, double t,
                       bool same_group) {
  return eval_population_ex(spec, w, w, spec.sigma, t, same_group);
}

}  // namespace oplab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oplab/distributions.hpp"
#include "oplab/kernels.hpp"
#include "oplab/micro.hpp"

namespace oplab {

struct MeanFieldPopulation {
  std::string name;
  double lambda = 1.0;  // mass fraction
  double alpha = 0.1;
  double eps = 0.6;
  double sigma = 1.0;
  LocalKernelSpec kernel;
  GridDensity density;
};

struct MeanFieldConfig {
  std::vector<MeanFieldPopulation> populations;
  PopulationKernelSpec pop_kernel;
  double dt = 0.05;
};

// Cell-interface velocities, n_cells + 1 entries. Boundary edges carry zero
// velocity: no mass leaves [-1, 1].
struct VelocityField {
  std::vector<double> edge_v;
  double max_abs() const;
};

// Kernel weight between ordered populations (source r feeding observer k),
// honoring mask, threshold (with the observer's sigma) and gate redirection.
double population_pair_weight(const PopulationKernelSpec& spec, int source,
                              int target, double w, double gate_w,
                              double sigma, double t);

// Transport velocity of population k at point x, from the current densities.
// Recomputes the pairwise W1 weights on every call; the engine caches them
// per sub-step instead.
double velocity(double x, const MeanFieldConfig& sys, int k, double t);

// One conservative first-order upwind update. Boundary fluxes are identically
// zero; total mass is preserved to 1e-12. Throws CflError when
// dt * max|v| / dx exceeds 0.9, reporting the admissible bound.
GridDensity upwind_step(const GridDensity& rho, const VelocityField& field,
                        double dt);

struct MeanFieldRunResult {
  std::vector<long> frame_steps;
  std::vector<double> frame_times;
  std::vector<std::vector<GridDensity>> frames;  // per frame, per population
  std::vector<DistanceRecord> distances;
};

class MeanFieldEngine {
 public:
  explicit MeanFieldEngine(MeanFieldConfig cfg);

  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  long step_index() const { return step_; }
  const MeanFieldConfig& config() const { return cfg_; }
  const GridDensity& density(int k) const { return rho_[k]; }
  int population_count() const { return static_cast<int>(rho_.size()); }

  // Advances one dt, sub-stepping under the advective stability bound with
  // the pairwise weights and velocity fields recomputed each sub-step.
  void step();

  std::vector<double> pairwise_w1() const;
  VelocityField velocity_field(int k) const;

  // Largest |mass - 1| seen after any sub-step so far.
  double max_mass_drift() const { return max_drift_; }

  MeanFieldRunResult run(long n_steps, long save_every);

 private:
  std::vector<double> weight_matrix(double t) const;
  VelocityField field_for(int k, const std::vector<double>& weights) const;

  MeanFieldConfig cfg_;
  std::vector<GridDensity> rho_;
  long step_ = 0;
  double max_drift_ = 0.0;
};

struct OracleOptions {
  std::size_t n_particles = 2000;
  std::uint64_t seed = 0;
  double dt = 0.01;
  bool stratified = true;  // quantile-midpoint particles; false draws iid
  StepMethod method = StepMethod::Rk4;
};

struct OracleRunResult {
  std::vector<long> frame_steps;
  std::vector<double> frame_times;
  // frames[f][k]: sorted particle opinions of population k.
  std::vector<std::vector<std::vector<double>>> frames;
};

// Self-consistent particle solution of the mean-field dynamics: particles
// sampled from each initial density and advected by the velocity field of
// the particle ensemble itself. Cross-validates the grid solver.
OracleRunResult characteristics_oracle(const MeanFieldConfig& sys,
                                       long n_steps, long save_every,
                                       const OracleOptions& opt);

}  // namespace oplab

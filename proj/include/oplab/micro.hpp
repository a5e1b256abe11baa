#pragma once

#include <limits>
#include <string>
#include <vector>

#include "oplab/kernels.hpp"

namespace oplab {

struct AgentParams {
  double alpha = 0.1;  // stubbornness rate; 0 freezes the agent
  double eps = 0.6;    // confidence radius
  double sigma = 1.0;  // population threshold
  double scope = std::numeric_limits<double>::infinity();  // observation radius
};

enum class WeightMode { Frozen, Live };
enum class StepMethod { Euler, Rk4 };

// One partition of the agent set: a disjoint cover by groups plus the
// population kernel acting between those groups. Frozen mode pins the
// pairwise distances at t=0 (identity-invariant); Live recomputes them from
// the empirical distributions each step. A time schedule on the kernel is
// honored in both modes.
struct MicroPartition {
  std::vector<int> group_of;  // one entry per agent
  int n_groups = 0;
  std::vector<std::string> group_names;  // optional, size n_groups when set
  double weight = 1.0;                   // mixing coefficient gamma_r
  WeightMode mode = WeightMode::Frozen;
  PopulationKernelSpec kernel;
};

struct MicroConfig {
  std::vector<double> initial_opinions;
  std::vector<AgentParams> agents;
  std::vector<MicroPartition> partitions;
  LocalKernelSpec local_kernel;
  StepMethod method = StepMethod::Euler;
  double dt = 0.05;
};

struct DistanceRecord {
  long step = 0;
  double t = 0.0;
  int partition = 0;
  int group_a = 0;
  int group_b = 0;
  double w1 = 0.0;
};

struct MicroRunResult {
  std::vector<long> frame_steps;
  std::vector<double> frame_times;
  std::vector<std::vector<double>> frames;  // opinions per frame
  std::vector<DistanceRecord> distances;    // current pairwise W1 per frame
};

class MicroEngine {
 public:
  explicit MicroEngine(MicroConfig cfg);

  int agent_count() const { return static_cast<int>(x_.size()); }
  long step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  const std::vector<double>& opinions() const { return x_; }
  const MicroConfig& config() const { return cfg_; }

  // Advances one dt. Live weights are rebuilt from the pre-step state, then
  // every drift reads that frozen snapshot.
  void step();

  // Drift of agent i at the current state under the current step's weights.
  double drift(int i) const;

  // Pairwise W1 between the partition's full groups at the current state.
  std::vector<double> group_w1(int partition) const;

  MicroRunResult run(long n_steps, long save_every);

 private:
  struct PartitionState {
    std::vector<std::vector<int>> members;      // per group, ascending ids
    std::vector<std::vector<double>> sorted;    // per group sorted opinions
    std::vector<double> w1;                     // n_groups^2
    std::vector<double> expval;                 // exp(-Gamma(t) * w1)
    double gate_w = 0.0;
    // Scope-limited agents carry their own rows: W1 of (own group, q)
    // restricted to the agent's window; an unobservable group stores a zero
    // expval. Laid out n_scoped * n_groups.
    std::vector<double> scoped_w1;
    std::vector<double> scoped_expval;
    std::vector<double> scoped_gate;
  };

  void rebuild_distances(int r);   // sorted groups + W1 (+ scoped rows)
  void rebuild_expvals(int r);     // exp values at the current time
  double drift_at(const std::vector<double>& x, int i) const;
  void compute_drifts(const std::vector<double>& x,
                      std::vector<double>& out) const;
  double population_weight(int r, int i, int j) const;

  MicroConfig cfg_;
  std::vector<double> x_;
  std::vector<PartitionState> parts_;
  std::vector<int> scoped_slot_;  // agent -> scoped row index, or -1
  int n_scoped_ = 0;
  long step_ = 0;
  int workers_ = 1;
  mutable std::vector<double> k1_, k2_, k3_, k4_, xs_;
};

namespace detail {
// Test hook for the degenerate-neighborhood guard: drift with an injected
// pairwise weight function.
double drift_with_weights(const std::vector<double>& x,
                          const std::vector<AgentParams>& agents, int i,
                          const std::function<double(int, int)>& weight,
                          long step);
}  // namespace detail

}  // namespace oplab

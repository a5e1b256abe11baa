#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oplab/distributions.hpp"
#include "oplab/kernels.hpp"
#include "oplab/meanfield.hpp"
#include "oplab/micro.hpp"

namespace oplab {

enum class EngineKind { Micro, MeanField };
enum class GroupingKind { Population, InitialSign };

struct PopulationSpec {
  std::string name;
  std::size_t size = 0;   // micro agent count
  double lambda = 0.0;    // mean-field mass fraction; 0 derives from sizes
  InitialDistributionSpec initial;
  double alpha = 0.1;
  double eps = 0.6;
  double sigma = 1.0;
  std::optional<double> scope;  // observation radius; absent = unbounded
  bool stubborn = false;        // forces alpha = 0
};

// Scenario-level partition: grouping rule plus the population kernel acting
// between its groups. Mask and gate reference groups by name; the agent-side
// threshold sigma comes from the populations.
struct PartitionSpec {
  GroupingKind grouping = GroupingKind::Population;
  double weight = 1.0;
  WeightMode mode = WeightMode::Frozen;
  double gamma = 0.0;
  ThresholdMode threshold = ThresholdMode::None;
  std::optional<GammaSchedule> schedule;
  std::optional<std::vector<std::pair<std::string, std::string>>>
      mask;  // (source, target)
  std::optional<std::pair<std::string, std::string>> threshold_gate;
};

struct IntegratorSpec {
  StepMethod method = StepMethod::Euler;
  double dt = 0.05;
  double t_end = 20.0;
  long save_every = 1;
};

struct ScenarioConfig {
  std::string name = "scenario";
  EngineKind engine = EngineKind::Micro;
  std::uint64_t seed = 0;
  int trials = 1;
  IntegratorSpec integrator;
  std::size_t n_cells = 256;
  LocalKernelSpec local_kernel;
  std::vector<PopulationSpec> populations;
  std::vector<PartitionSpec> partitions;

  long n_steps() const;
};

struct ValidationIssue {
  std::string path;
  std::string rule;
  std::string message;
};

struct ValidationResult {
  std::optional<ScenarioConfig> config;
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Parses and validates a scenario document. Every issue names the field path
// and the violated rule; on success the returned config carries all defaults
// filled in (dt = 0.05, save_every = 1, n_cells = 256, ...).
ValidationResult validate_scenario(const nlohmann::json& doc);

nlohmann::json to_json(const ScenarioConfig& cfg);
nlohmann::json to_json(const InitialDistributionSpec& spec);

// FNV-1a over the canonical serialized form; stable across platforms.
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

// Resolved micro run: engine config plus naming metadata for the writers.
struct MicroBuild {
  MicroConfig config;
  std::vector<std::vector<std::string>> group_names;  // per partition
  long n_steps = 0;
  long save_every = 1;
};
MicroBuild build_micro(const ScenarioConfig& cfg, std::uint64_t seed);

struct MeanFieldBuild {
  MeanFieldConfig config;
  long n_steps = 0;
  long save_every = 1;
};
MeanFieldBuild build_meanfield(const ScenarioConfig& cfg);

}  // namespace oplab

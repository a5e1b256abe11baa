#include "oplab/presets.hpp"

#include <functional>
#include <map>

#include "oplab/errors.hpp"

namespace oplab {

namespace {

InitialDistributionSpec tg(double mean, double std) {
  return {InitialDistributionSpec::TruncatedGaussian{mean, std, -1.0, 1.0}};
}

InitialDistributionSpec unif(double a, double b) {
  return {InitialDistributionSpec::Uniform{a, b}};
}

PopulationSpec pop(std::string name, std::size_t size,
                   InitialDistributionSpec initial, double alpha, double eps,
                   double sigma) {
  PopulationSpec p;
  p.name = std::move(name);
  p.size = size;
  p.initial = std::move(initial);
  p.alpha = alpha;
  p.eps = eps;
  p.sigma = sigma;
  return p;
}

ScenarioConfig base(std::string name, EngineKind engine) {
  ScenarioConfig cfg;
  cfg.name = std::move(name);
  cfg.engine = engine;
  cfg.integrator = {StepMethod::Euler, 0.05, 20.0, 20};
  return cfg;
}

using Mask = std::vector<std::pair<std::string, std::string>>;

ScenarioConfig basic_kernels(const std::string& name, LocalKernelSpec kernel) {
  auto cfg = base(name, EngineKind::Micro);
  cfg.local_kernel = kernel;
  cfg.populations.push_back(pop("all", 500, unif(-1.0, 1.0), 0.1, 0.6, 1.0));
  cfg.partitions.push_back(PartitionSpec{});
  return cfg;
}

ScenarioConfig resistance() {
  auto cfg = base("resistance", EngineKind::Micro);
  cfg.local_kernel = {.kind = LocalKernelKind::StateExponential,
                      .gamma = 1.0,
                      .alpha = 2.0};
  cfg.trials = 50;
  cfg.populations.push_back(pop("all", 300, unif(-1.0, 1.0), 0.1, 0.6, 1.0));
  cfg.partitions.push_back(PartitionSpec{});
  return cfg;
}

// Two truncated-Gaussian camps around -0.4 and 0.4, shaped so their tails
// overlap within the confidence radius.
ScenarioConfig two_camp(const std::string& name, double gamma,
                        WeightMode mode, double alpha, double eps,
                        LocalKernelSpec kernel) {
  auto cfg = base(name, EngineKind::Micro);
  cfg.local_kernel = kernel;
  cfg.populations.push_back(pop("p1", 200, tg(-0.4, 0.2), alpha, eps, 2.0));
  cfg.populations.push_back(pop("p2", 200, tg(0.4, 0.2), alpha, eps, 2.0));
  PartitionSpec part;
  part.mode = mode;
  part.gamma = gamma;
  cfg.partitions.push_back(part);
  return cfg;
}

ScenarioConfig in_group_bias(const std::string& name, double gamma) {
  return two_camp(name, gamma, WeightMode::Frozen, 0.5, 0.6,
                  {.kind = LocalKernelKind::Uniform});
}

ScenarioConfig asymmetric_bias(const std::string& name, bool coupled) {
  auto cfg = two_camp(name, 1.0, WeightMode::Frozen, 0.5, 0.6,
                      {.kind = LocalKernelKind::Uniform});
  cfg.partitions[0].mask = coupled ? Mask{{"p1", "p2"}} : Mask{};
  return cfg;
}

ScenarioConfig group_cohesion(const std::string& name, double gamma) {
  return two_camp(name, gamma, WeightMode::Live, 0.4, 0.4,
                  {.kind = LocalKernelKind::Exponential,
                   .gamma = 1.0,
                   .alpha = 2.0});
}

// Small empirical samples that happen to overlap, drawn against true
// population densities that do not: the isolated run sees only the samples.
ScenarioConfig isolated_vs_integrated_micro() {
  auto cfg = base("isolated-vs-integrated", EngineKind::Micro);
  cfg.populations.push_back(pop("p1", 100, unif(-0.1, 0.1), 0.5, 0.5, 0.5));
  cfg.populations.push_back(pop("p2", 100, unif(-0.05, 0.15), 0.5, 0.5, 0.5));
  PartitionSpec part;
  part.mode = WeightMode::Live;
  part.gamma = 1.0;
  part.threshold = ThresholdMode::Above;
  cfg.partitions.push_back(part);
  return cfg;
}

ScenarioConfig isolated_vs_integrated_meanfield() {
  auto cfg = base("isolated-vs-integrated-meanfield", EngineKind::MeanField);
  cfg.populations.push_back(pop("p1", 0, tg(-0.6, 0.05), 0.5, 0.5, 0.5));
  cfg.populations.push_back(pop("p2", 0, tg(0.6, 0.05), 0.5, 0.5, 0.5));
  cfg.populations[0].lambda = 0.5;
  cfg.populations[1].lambda = 0.5;
  PartitionSpec part;
  part.mode = WeightMode::Live;
  part.gamma = 1.0;
  part.threshold = ThresholdMode::Above;
  cfg.partitions.push_back(part);
  return cfg;
}

// Two extreme camps and a neutral population whose outward attention decays
// over time. Only the neutral group listens across groups.
ScenarioConfig decaying_effects(const std::string& name, bool decay) {
  auto cfg = base(name, EngineKind::Micro);
  cfg.populations.push_back(pop("p1", 150, tg(-0.5, 0.15), 0.5, 0.5, 2.0));
  cfg.populations.push_back(pop("p2", 150, tg(0.5, 0.15), 0.5, 0.5, 2.0));
  cfg.populations.push_back(pop("p3", 100, unif(-0.3, 0.3), 0.5, 0.5, 2.0));
  PartitionSpec part;
  part.mode = WeightMode::Frozen;
  part.gamma = 0.5;
  if (decay) part.schedule = GammaSchedule{1.0};
  part.mask = Mask{{"p1", "p3"}, {"p2", "p3"}};
  cfg.partitions.push_back(part);
  return cfg;
}

// Polarized camps that never interact directly; a stubborn neutral
// population relays information between them. The below-threshold variant
// cuts the relay once the camps get close, gated on the p1-p2 distance.
ScenarioConfig polarization(const std::string& name, bool transfer,
                            bool below) {
  auto cfg = base(name, EngineKind::Micro);
  cfg.populations.push_back(pop("p1", 150, tg(-0.5, 0.1), 0.5, 0.6, 0.5));
  cfg.populations.push_back(pop("p2", 150, tg(0.5, 0.1), 0.5, 0.6, 0.5));
  if (transfer) {
    auto p3 = pop("p3", 100, unif(-0.4, 0.4), 0.0, 0.6, 0.5);
    p3.stubborn = true;
    cfg.populations.push_back(p3);
  }
  PartitionSpec part;
  part.mode = WeightMode::Live;
  part.gamma = 0.0;
  if (transfer) {
    part.mask = Mask{{"p3", "p1"}, {"p3", "p2"}, {"p1", "p3"}, {"p2", "p3"}};
  } else {
    part.mask = Mask{};
  }
  if (below) {
    part.threshold = ThresholdMode::Below;
    part.threshold_gate = std::make_pair(std::string("p1"), std::string("p2"));
  }
  cfg.partitions.push_back(part);
  return cfg;
}

// Two overlapping neutral camps with different spreads, cross-cut by an
// ideology partition on the initial sign. g weighs the ideology identity.
ScenarioConfig multi_identity(const std::string& name, double g) {
  auto cfg = base(name, EngineKind::Micro);
  cfg.populations.push_back(pop("narrow", 200, tg(0.0, 0.1), 0.1, 0.6, 2.0));
  cfg.populations.push_back(pop("wide", 200, tg(0.0, 0.35), 0.1, 0.6, 2.0));
  PartitionSpec affiliation;
  affiliation.grouping = GroupingKind::Population;
  affiliation.weight = 1.0 - g;
  affiliation.mode = WeightMode::Frozen;
  affiliation.gamma = 10.0;
  PartitionSpec ideology;
  ideology.grouping = GroupingKind::InitialSign;
  ideology.weight = g;
  ideology.mode = WeightMode::Frozen;
  ideology.gamma = 10.0;
  cfg.partitions.push_back(affiliation);
  cfg.partitions.push_back(ideology);
  return cfg;
}

const std::map<std::string, std::function<ScenarioConfig()>>& catalogue() {
  static const std::map<std::string, std::function<ScenarioConfig()>> table = {
      {"basic-kernels",
       [] {
         return basic_kernels("basic-kernels",
                              {.kind = LocalKernelKind::Uniform});
       }},
      {"basic-kernels-triangular",
       [] {
         return basic_kernels("basic-kernels-triangular",
                              {.kind = LocalKernelKind::Triangular});
       }},
      {"basic-kernels-exp",
       [] {
         return basic_kernels(
             "basic-kernels-exp",
             {.kind = LocalKernelKind::Exponential, .gamma = 1.0, .alpha = 1.0});
       }},
      {"basic-kernels-exp-sharp",
       [] {
         return basic_kernels(
             "basic-kernels-exp-sharp",
             {.kind = LocalKernelKind::Exponential, .gamma = 5.0, .alpha = 2.0});
       }},
      {"resistance", resistance},
      {"in-group-bias", [] { return in_group_bias("in-group-bias", 5.0); }},
      {"in-group-bias-none",
       [] { return in_group_bias("in-group-bias-none", 0.0); }},
      {"in-group-bias-strong",
       [] { return in_group_bias("in-group-bias-strong", 50.0); }},
      {"asymmetric-bias",
       [] { return asymmetric_bias("asymmetric-bias", true); }},
      {"asymmetric-bias-baseline",
       [] { return asymmetric_bias("asymmetric-bias-baseline", false); }},
      {"group-cohesion", [] { return group_cohesion("group-cohesion", 2.0); }},
      {"group-cohesion-weak",
       [] { return group_cohesion("group-cohesion-weak", 0.3); }},
      {"group-cohesion-strong",
       [] { return group_cohesion("group-cohesion-strong", 10.0); }},
      {"isolated-vs-integrated", isolated_vs_integrated_micro},
      {"isolated-vs-integrated-meanfield", isolated_vs_integrated_meanfield},
      {"decaying-effects",
       [] { return decaying_effects("decaying-effects", true); }},
      {"decaying-effects-nodecay",
       [] { return decaying_effects("decaying-effects-nodecay", false); }},
      {"polarization-reduction",
       [] { return polarization("polarization-reduction", true, false); }},
      {"polarization-reduction-baseline",
       [] {
         return polarization("polarization-reduction-baseline", false, false);
       }},
      {"polarization-reduction-below",
       [] { return polarization("polarization-reduction-below", true, true); }},
      {"multi-identity-dominance",
       [] { return multi_identity("multi-identity-dominance", 0.5); }},
      {"multi-identity-dominance-g01",
       [] { return multi_identity("multi-identity-dominance-g01", 0.1); }},
      {"multi-identity-dominance-g05",
       [] { return multi_identity("multi-identity-dominance-g05", 0.5); }},
      {"multi-identity-dominance-g09",
       [] { return multi_identity("multi-identity-dominance-g09", 0.9); }},
  };
  return table;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
  const auto& table = catalogue();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string msg = "unknown preset '" + name + "'; available:";
    for (const auto& [key, _] : table) msg += " " + key;
    throw ConfigError(msg);
  }
  return it->second();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [key, _] : catalogue()) names.push_back(key);
  return names;
}

}  // namespace oplab

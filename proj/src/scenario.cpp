#include "oplab/scenario.hpp"

#include <cmath>
#include <map>
#include <set>

#include "oplab/errors.hpp"
#include "oplab/rng.hpp"

namespace oplab {

using nlohmann::json;

long ScenarioConfig::n_steps() const {
  return std::llround(integrator.t_end / integrator.dt);
}

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

struct Parser {
  std::vector<ValidationIssue>& issues;

  void add(const std::string& path, const std::string& rule,
           const std::string& message) {
    issues.push_back({path, rule, message});
  }

  void check_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& known) {
    if (!obj.is_object()) return;
    for (const auto& [key, _] : obj.items()) {
      if (!known.count(key)) add(path + "." + key, "unknown-field", "unrecognized key");
    }
  }

  bool number(const json& obj, const std::string& path, const char* key,
              double& out, bool required = false) {
    if (!obj.contains(key)) {
      if (required) add(path + "." + key, "missing-field", "required number");
      return false;
    }
    if (!obj[key].is_number()) {
      add(path + "." + key, "type-error", "expected a number");
      return false;
    }
    out = obj[key].get<double>();
    return true;
  }

  bool integer(const json& obj, const std::string& path, const char* key,
               long long& out) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number_integer()) {
      add(path + "." + key, "type-error", "expected an integer");
      return false;
    }
    out = obj[key].get<long long>();
    return true;
  }

  bool text(const json& obj, const std::string& path, const char* key,
            std::string& out, bool required = false) {
    if (!obj.contains(key)) {
      if (required) add(path + "." + key, "missing-field", "required string");
      return false;
    }
    if (!obj[key].is_string()) {
      add(path + "." + key, "type-error", "expected a string");
      return false;
    }
    out = obj[key].get<std::string>();
    return true;
  }

  InitialDistributionSpec initial_spec(const json& obj,
                                       const std::string& path) {
    InitialDistributionSpec spec;
    if (!obj.is_object()) {
      add(path, "type-error", "expected an object");
      return spec;
    }
    std::string kind;
    if (!text(obj, path, "kind", kind, true)) return spec;
    if (kind == "uniform") {
      check_keys(obj, path, {"kind", "a", "b"});
      InitialDistributionSpec::Uniform u;
      number(obj, path, "a", u.lo, true);
      number(obj, path, "b", u.hi, true);
      if (!(u.lo < u.hi)) add(path, "range-empty", "uniform needs a < b");
      if (u.lo < kDomainLo || u.hi > kDomainHi) {
        add(path, "bounds-outside-domain", "endpoints beyond [-1, 1]");
      }
      spec.kind = u;
    } else if (kind == "truncated_gaussian") {
      check_keys(obj, path, {"kind", "mean", "std", "lo", "hi"});
      InitialDistributionSpec::TruncatedGaussian t;
      number(obj, path, "mean", t.mean, true);
      number(obj, path, "std", t.stddev, true);
      number(obj, path, "lo", t.lo, true);
      number(obj, path, "hi", t.hi, true);
      if (!(t.stddev > 0.0)) add(path + ".std", "std-positive", "std must be > 0");
      if (!(t.lo < t.hi)) add(path, "range-empty", "needs lo < hi");
      if (t.lo < kDomainLo || t.hi > kDomainHi) {
        add(path, "bounds-outside-domain", "endpoints beyond [-1, 1]");
      }
      spec.kind = t;
    } else if (kind == "dirac") {
      check_keys(obj, path, {"kind", "x"});
      InitialDistributionSpec::Dirac d;
      number(obj, path, "x", d.x, true);
      if (d.x < kDomainLo || d.x > kDomainHi) {
        add(path + ".x", "bounds-outside-domain", "x beyond [-1, 1]");
      }
      spec.kind = d;
    } else if (kind == "mixture") {
      check_keys(obj, path, {"kind", "components"});
      InitialDistributionSpec::Mixture m;
      if (!obj.contains("components") || !obj["components"].is_array() ||
          obj["components"].empty()) {
        add(path + ".components", "mixture-empty", "needs >= 1 component");
      } else {
        double wsum = 0.0;
        int idx = 0;
        for (const auto& comp : obj["components"]) {
          const std::string cpath =
              path + ".components[" + std::to_string(idx++) + "]";
          check_keys(comp, cpath, {"weight", "spec"});
          double w = 0.0;
          number(comp, cpath, "weight", w, true);
          if (!(w > 0.0)) add(cpath + ".weight", "mixture-weight-positive", "weight must be > 0");
          wsum += w;
          m.components.emplace_back(
              w, comp.contains("spec")
                     ? initial_spec(comp["spec"], cpath + ".spec")
                     : InitialDistributionSpec{});
          if (!comp.contains("spec")) {
            add(cpath + ".spec", "missing-field", "required object");
          }
        }
        if (std::abs(wsum - 1.0) > 1e-12) {
          add(path + ".components", "mixture-weights-sum",
              "weights sum to " + std::to_string(wsum));
        }
      }
      spec.kind = m;
    } else {
      add(path + ".kind", "kernel-kind-invalid",
          "unknown distribution kind '" + kind + "'");
    }
    return spec;
  }

  LocalKernelSpec local_kernel(const json& obj, const std::string& path) {
    LocalKernelSpec k;
    if (!obj.is_object()) {
      add(path, "type-error", "expected an object");
      return k;
    }
    check_keys(obj, path, {"kind", "gamma", "alpha"});
    std::string kind;
    if (!text(obj, path, "kind", kind, true)) return k;
    if (kind == "uniform") {
      k.kind = LocalKernelKind::Uniform;
    } else if (kind == "triangular") {
      k.kind = LocalKernelKind::Triangular;
    } else if (kind == "exp") {
      k.kind = LocalKernelKind::Exponential;
    } else if (kind == "state_exp") {
      k.kind = LocalKernelKind::StateExponential;
    } else {
      add(path + ".kind", "kernel-kind-invalid",
          "unknown local kernel '" + kind + "'");
      return k;
    }
    number(obj, path, "gamma", k.gamma);
    number(obj, path, "alpha", k.alpha);
    if (kind == "exp" || kind == "state_exp") {
      if (!(k.gamma > 0.0)) add(path + ".gamma", "gamma-positive", "gamma must be > 0");
      if (!(k.alpha > 0.0)) add(path + ".alpha", "alpha-positive", "alpha must be > 0");
    }
    return k;
  }
};

std::vector<std::string> partition_group_names(
    const ScenarioConfig& cfg, const PartitionSpec& part) {
  if (part.grouping == GroupingKind::InitialSign) return {"neg", "pos"};
  std::vector<std::string> names;
  names.reserve(cfg.populations.size());
  for (const auto& p : cfg.populations) names.push_back(p.name);
  return names;
}

}  // namespace

ValidationResult validate_scenario(const json& doc) {
  ValidationResult res;
  Parser p{res.issues};
  ScenarioConfig cfg;

  if (!doc.is_object()) {
    p.add("", "type-error", "scenario document must be an object");
    return res;
  }
  p.check_keys(doc, "", {"name", "engine", "seed", "trials", "integrator",
                         "grid", "local_kernel", "populations", "partitions"});

  p.text(doc, "", "name", cfg.name);
  if (!valid_name(cfg.name)) {
    p.add("name", "population-name-invalid", "names use [A-Za-z0-9_.-]");
  }

  std::string engine;
  if (p.text(doc, "", "engine", engine, true)) {
    if (engine == "micro") {
      cfg.engine = EngineKind::Micro;
    } else if (engine == "meanfield") {
      cfg.engine = EngineKind::MeanField;
    } else {
      p.add("engine", "engine-invalid", "expected 'micro' or 'meanfield'");
    }
  }

  long long seed = 0;
  if (p.integer(doc, "", "seed", seed)) cfg.seed = static_cast<std::uint64_t>(seed);
  long long trials = 1;
  if (p.integer(doc, "", "trials", trials)) {
    if (trials < 1) p.add("trials", "trials-positive", "trials must be >= 1");
    cfg.trials = static_cast<int>(trials);
  }

  if (doc.contains("integrator")) {
    const auto& integ = doc["integrator"];
    p.check_keys(integ, "integrator", {"method", "dt", "t_end", "save_every"});
    std::string method;
    if (p.text(integ, "integrator", "method", method)) {
      if (method == "euler") {
        cfg.integrator.method = StepMethod::Euler;
      } else if (method == "rk4") {
        cfg.integrator.method = StepMethod::Rk4;
      } else {
        p.add("integrator.method", "method-invalid", "expected 'euler' or 'rk4'");
      }
    }
    p.number(integ, "integrator", "dt", cfg.integrator.dt);
    p.number(integ, "integrator", "t_end", cfg.integrator.t_end, true);
    long long se = 1;
    if (p.integer(integ, "integrator", "save_every", se)) {
      if (se < 1) p.add("integrator.save_every", "save-every-positive", "must be >= 1");
      cfg.integrator.save_every = static_cast<long>(se);
    }
  } else {
    p.add("integrator", "missing-field", "required object");
  }
  if (!(cfg.integrator.dt > 0.0)) p.add("integrator.dt", "dt-positive", "dt must be > 0");
  if (!(cfg.integrator.t_end > 0.0)) {
    p.add("integrator.t_end", "t-end-positive", "t_end must be > 0");
  }

  if (doc.contains("grid")) {
    p.check_keys(doc["grid"], "grid", {"n_cells"});
    long long nc = 256;
    if (p.integer(doc["grid"], "grid", "n_cells", nc)) {
      if (nc < 1) p.add("grid.n_cells", "n-cells-positive", "must be >= 1");
      cfg.n_cells = static_cast<std::size_t>(nc);
    }
  }

  if (doc.contains("local_kernel")) {
    cfg.local_kernel = p.local_kernel(doc["local_kernel"], "local_kernel");
  }

  if (!doc.contains("populations") || !doc["populations"].is_array() ||
      doc["populations"].empty()) {
    p.add("populations", "populations-empty", "needs >= 1 population");
    return res;
  }
  std::set<std::string> seen;
  int pi = 0;
  for (const auto& pop : doc["populations"]) {
    const std::string path = "populations[" + std::to_string(pi++) + "]";
    PopulationSpec ps;
    p.check_keys(pop, path,
                 {"name", "size", "lambda", "initial", "alpha", "eps", "sigma",
                  "scope", "stubborn"});
    p.text(pop, path, "name", ps.name, true);
    if (!valid_name(ps.name)) {
      p.add(path + ".name", "population-name-invalid", "names use [A-Za-z0-9_.-]");
    } else if (!seen.insert(ps.name).second) {
      p.add(path + ".name", "population-name-duplicate", "duplicate name");
    }
    long long size = 0;
    if (p.integer(pop, path, "size", size)) {
      if (size < 1) p.add(path + ".size", "population-size", "size must be >= 1");
      ps.size = static_cast<std::size_t>(std::max<long long>(size, 0));
    }
    double lambda = 0.0;
    if (p.number(pop, path, "lambda", lambda)) {
      if (!(lambda > 0.0)) p.add(path + ".lambda", "lambda-positive", "lambda must be > 0");
      ps.lambda = lambda;
    }
    if (pop.contains("initial")) {
      ps.initial = p.initial_spec(pop["initial"], path + ".initial");
    } else {
      p.add(path + ".initial", "missing-field", "required object");
    }
    p.number(pop, path, "alpha", ps.alpha);
    if (!(ps.alpha >= 0.0 && ps.alpha <= 1.0)) {
      p.add(path + ".alpha", "alpha-range", "alpha must lie in [0, 1]");
    }
    p.number(pop, path, "eps", ps.eps);
    if (!(ps.eps > 0.0)) p.add(path + ".eps", "eps-positive", "eps must be > 0");
    p.number(pop, path, "sigma", ps.sigma);
    if (!(ps.sigma > 0.0)) p.add(path + ".sigma", "sigma-positive", "sigma must be > 0");
    double scope = 0.0;
    if (p.number(pop, path, "scope", scope)) {
      ps.scope = scope;
      if (scope < ps.eps) {
        p.add(path + ".scope", "scope-below-confidence", "scope must be >= eps");
      }
    }
    if (pop.contains("stubborn")) {
      if (!pop["stubborn"].is_boolean()) {
        p.add(path + ".stubborn", "type-error", "expected a boolean");
      } else {
        ps.stubborn = pop["stubborn"].get<bool>();
      }
    }
    if (ps.stubborn) ps.alpha = 0.0;
    cfg.populations.push_back(std::move(ps));
  }

  // Mass fractions: explicit lambdas must cover every population and sum to
  // one; otherwise they derive from the sizes.
  {
    int with_lambda = 0;
    for (const auto& ps : cfg.populations) with_lambda += ps.lambda > 0.0;
    if (with_lambda != 0 &&
        with_lambda != static_cast<int>(cfg.populations.size())) {
      p.add("populations", "lambda-partial",
            "set lambda on every population or on none");
    } else if (with_lambda > 0) {
      double sum = 0.0;
      for (const auto& ps : cfg.populations) sum += ps.lambda;
      if (std::abs(sum - 1.0) > 1e-12) {
        p.add("populations", "mass-fractions-sum",
              "lambdas sum to " + std::to_string(sum));
      }
    } else if (cfg.engine == EngineKind::MeanField) {
      std::size_t total = 0;
      for (const auto& ps : cfg.populations) total += ps.size;
      if (total == 0) {
        p.add("populations", "meanfield-mass-missing",
              "mean-field runs need lambda or size per population");
      } else {
        for (auto& ps : cfg.populations) {
          ps.lambda = static_cast<double>(ps.size) / static_cast<double>(total);
        }
      }
    }
    if (cfg.engine == EngineKind::Micro) {
      for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
        if (cfg.populations[i].size == 0) {
          p.add("populations[" + std::to_string(i) + "].size",
                "population-size", "micro runs need size >= 1");
        }
      }
    }
  }

  if (doc.contains("partitions")) {
    if (!doc["partitions"].is_array() || doc["partitions"].empty()) {
      p.add("partitions", "type-error", "expected a nonempty array");
    } else {
      int ri = 0;
      for (const auto& part : doc["partitions"]) {
        const std::string path = "partitions[" + std::to_string(ri++) + "]";
        PartitionSpec ps;
        p.check_keys(part, path, {"grouping", "weight", "mode", "kernel"});
        std::string grouping = "population";
        p.text(part, path, "grouping", grouping);
        if (grouping == "population") {
          ps.grouping = GroupingKind::Population;
        } else if (grouping == "initial_sign") {
          ps.grouping = GroupingKind::InitialSign;
        } else {
          p.add(path + ".grouping", "grouping-invalid",
                "expected 'population' or 'initial_sign'");
        }
        p.number(part, path, "weight", ps.weight);
        if (!(ps.weight >= 0.0)) {
          p.add(path + ".weight", "weight-nonnegative", "weight must be >= 0");
        }
        std::string mode = "frozen";
        p.text(part, path, "mode", mode);
        if (mode == "frozen") {
          ps.mode = WeightMode::Frozen;
        } else if (mode == "live") {
          ps.mode = WeightMode::Live;
        } else {
          p.add(path + ".mode", "mode-invalid", "expected 'frozen' or 'live'");
        }
        if (part.contains("kernel")) {
          const auto& ker = part["kernel"];
          const std::string kpath = path + ".kernel";
          p.check_keys(ker, kpath,
                       {"gamma", "threshold", "schedule", "mask",
                        "threshold_gate"});
          p.number(ker, kpath, "gamma", ps.gamma);
          if (!(ps.gamma >= 0.0)) {
            p.add(kpath + ".gamma", "gamma-nonnegative", "gamma must be >= 0");
          }
          std::string th = "none";
          p.text(ker, kpath, "threshold", th);
          if (th == "none") {
            ps.threshold = ThresholdMode::None;
          } else if (th == "above") {
            ps.threshold = ThresholdMode::Above;
          } else if (th == "below") {
            ps.threshold = ThresholdMode::Below;
          } else {
            p.add(kpath + ".threshold", "threshold-mode-invalid",
                  "expected 'none', 'above' or 'below'");
          }
          if (ker.contains("schedule")) {
            p.check_keys(ker["schedule"], kpath + ".schedule", {"rate"});
            double rate = 0.0;
            p.number(ker["schedule"], kpath + ".schedule", "rate", rate, true);
            if (rate < 0.0) {
              p.add(kpath + ".schedule.rate", "schedule-rate-negative",
                    "rate must be >= 0");
            }
            if (!(ps.gamma > 0.0)) {
              p.add(kpath + ".gamma", "schedule-gamma-zero",
                    "a schedule needs Gamma(0) > 0");
            }
            ps.schedule = GammaSchedule{rate};
          }
          if (ker.contains("mask")) {
            if (!ker["mask"].is_array()) {
              p.add(kpath + ".mask", "type-error", "expected an array");
            } else {
              std::vector<std::pair<std::string, std::string>> mask;
              int mi = 0;
              for (const auto& entry : ker["mask"]) {
                const std::string mpath =
                    kpath + ".mask[" + std::to_string(mi++) + "]";
                p.check_keys(entry, mpath, {"source", "target"});
                std::string src, tgt;
                p.text(entry, mpath, "source", src, true);
                p.text(entry, mpath, "target", tgt, true);
                mask.emplace_back(src, tgt);
              }
              ps.mask = std::move(mask);
            }
          }
          if (ker.contains("threshold_gate")) {
            const auto& gate = ker["threshold_gate"];
            p.check_keys(gate, kpath + ".threshold_gate", {"a", "b"});
            std::string a, b;
            p.text(gate, kpath + ".threshold_gate", "a", a, true);
            p.text(gate, kpath + ".threshold_gate", "b", b, true);
            ps.threshold_gate = std::make_pair(a, b);
          }
        }
        cfg.partitions.push_back(std::move(ps));
      }
    }
  }
  if (cfg.partitions.empty()) {
    cfg.partitions.push_back(PartitionSpec{});
  }

  {
    double wsum = 0.0;
    for (const auto& part : cfg.partitions) wsum += part.weight;
    if (std::abs(wsum - 1.0) > 1e-12) {
      p.add("partitions", "partition-weights-sum",
            "weights sum to " + std::to_string(wsum));
    }
  }

  // Resolve mask and gate names against each partition's group names.
  for (std::size_t r = 0; r < cfg.partitions.size(); ++r) {
    const auto names = partition_group_names(cfg, cfg.partitions[r]);
    auto known = [&](const std::string& n) {
      for (const auto& g : names) {
        if (g == n) return true;
      }
      return false;
    };
    const std::string path = "partitions[" + std::to_string(r) + "].kernel";
    if (cfg.partitions[r].mask) {
      for (const auto& [src, tgt] : *cfg.partitions[r].mask) {
        if (!known(src) || !known(tgt)) {
          p.add(path + ".mask", "mask-unknown-group",
                "unknown group '" + (known(src) ? tgt : src) + "'");
        }
      }
    }
    if (cfg.partitions[r].threshold_gate) {
      const auto& [a, b] = *cfg.partitions[r].threshold_gate;
      if (!known(a) || !known(b)) {
        p.add(path + ".threshold_gate", "gate-unknown-group",
              "unknown group '" + (known(a) ? b : a) + "'");
      }
    }
    if (cfg.partitions[r].threshold != ThresholdMode::None) {
      for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
        if (!(cfg.populations[i].sigma > 0.0)) {
          p.add("populations[" + std::to_string(i) + "].sigma",
                "threshold-sigma-missing",
                "threshold modes need sigma > 0 on every population");
        }
      }
    }
  }

  if (cfg.engine == EngineKind::MeanField) {
    if (cfg.partitions.size() != 1) {
      p.add("partitions", "meanfield-single-partition",
            "mean-field runs use exactly one partition");
    } else if (cfg.partitions[0].grouping != GroupingKind::Population) {
      p.add("partitions[0].grouping", "meanfield-grouping",
            "mean-field partitions group by population");
    }
    for (std::size_t i = 0; i < cfg.populations.size(); ++i) {
      if (cfg.populations[i].scope) {
        p.add("populations[" + std::to_string(i) + "].scope",
              "meanfield-scope", "scopes apply to micro runs only");
      }
    }
    if (cfg.trials != 1) {
      p.add("trials", "meanfield-trials", "mean-field runs are deterministic");
    }
  }

  if (res.issues.empty()) res.config = std::move(cfg);
  return res;
}

json to_json(const InitialDistributionSpec& spec) {
  struct Visitor {
    json operator()(const InitialDistributionSpec::Uniform& u) const {
      return {{"kind", "uniform"}, {"a", u.lo}, {"b", u.hi}};
    }
    json operator()(const InitialDistributionSpec::TruncatedGaussian& t) const {
      return {{"kind", "truncated_gaussian"},
              {"mean", t.mean},
              {"std", t.stddev},
              {"lo", t.lo},
              {"hi", t.hi}};
    }
    json operator()(const InitialDistributionSpec::Dirac& d) const {
      return {{"kind", "dirac"}, {"x", d.x}};
    }
    json operator()(const InitialDistributionSpec::Mixture& m) const {
      json comps = json::array();
      for (const auto& [w, sub] : m.components) {
        comps.push_back({{"weight", w}, {"spec", to_json(sub)}});
      }
      return {{"kind", "mixture"}, {"components", comps}};
    }
  };
  return std::visit(Visitor{}, spec.kind);
}

namespace {

json kernel_to_json(const LocalKernelSpec& k) {
  switch (k.kind) {
    case LocalKernelKind::Uniform:
      return {{"kind", "uniform"}};
    case LocalKernelKind::Triangular:
      return {{"kind", "triangular"}};
    case LocalKernelKind::Exponential:
      return {{"kind", "exp"}, {"gamma", k.gamma}, {"alpha", k.alpha}};
    case LocalKernelKind::StateExponential:
      return {{"kind", "state_exp"}, {"gamma", k.gamma}, {"alpha", k.alpha}};
  }
  return {};
}

}  // namespace

json to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["engine"] = cfg.engine == EngineKind::Micro ? "micro" : "meanfield";
  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["integrator"] = {
      {"method", cfg.integrator.method == StepMethod::Euler ? "euler" : "rk4"},
      {"dt", cfg.integrator.dt},
      {"t_end", cfg.integrator.t_end},
      {"save_every", cfg.integrator.save_every}};
  if (cfg.engine == EngineKind::MeanField) {
    doc["grid"] = {{"n_cells", cfg.n_cells}};
  }
  doc["local_kernel"] = kernel_to_json(cfg.local_kernel);
  doc["populations"] = json::array();
  for (const auto& ps : cfg.populations) {
    json pop = {{"name", ps.name},
                {"initial", to_json(ps.initial)},
                {"alpha", ps.stubborn ? 0.0 : ps.alpha},
                {"eps", ps.eps},
                {"sigma", ps.sigma},
                {"stubborn", ps.stubborn}};
    if (ps.size > 0) pop["size"] = ps.size;
    if (ps.lambda > 0.0) pop["lambda"] = ps.lambda;
    if (ps.scope) pop["scope"] = *ps.scope;
    doc["populations"].push_back(std::move(pop));
  }
  doc["partitions"] = json::array();
  for (const auto& part : cfg.partitions) {
    json ker = {{"gamma", part.gamma}};
    ker["threshold"] = part.threshold == ThresholdMode::None    ? "none"
                       : part.threshold == ThresholdMode::Above ? "above"
                                                                : "below";
    if (part.schedule) ker["schedule"] = {{"rate", part.schedule->rate}};
    if (part.mask) {
      json mask = json::array();
      for (const auto& [src, tgt] : *part.mask) {
        mask.push_back({{"source", src}, {"target", tgt}});
      }
      ker["mask"] = std::move(mask);
    }
    if (part.threshold_gate) {
      ker["threshold_gate"] = {{"a", part.threshold_gate->first},
                               {"b", part.threshold_gate->second}};
    }
    doc["partitions"].push_back(
        {{"grouping", part.grouping == GroupingKind::Population
                          ? "population"
                          : "initial_sign"},
         {"weight", part.weight},
         {"mode", part.mode == WeightMode::Frozen ? "frozen" : "live"},
         {"kernel", std::move(ker)}});
  }
  return doc;
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  const std::string dump = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

MicroBuild build_micro(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.engine != EngineKind::Micro) {
    throw ConfigError("scenario is not a micro run");
  }
  MicroBuild out;
  MicroConfig& mc = out.config;
  mc.local_kernel = cfg.local_kernel;
  mc.method = cfg.integrator.method;
  mc.dt = cfg.integrator.dt;

  std::vector<int> population_of;
  for (std::size_t pi = 0; pi < cfg.populations.size(); ++pi) {
    const auto& ps = cfg.populations[pi];
    const auto samples =
        sample_initial(ps.initial, ps.size, mix_seed(seed, pi));
    for (double x : samples.samples()) {
      mc.initial_opinions.push_back(x);
      mc.agents.push_back(
          {ps.stubborn ? 0.0 : ps.alpha, ps.eps, ps.sigma,
           ps.scope.value_or(std::numeric_limits<double>::infinity())});
      population_of.push_back(static_cast<int>(pi));
    }
  }

  for (const auto& part : cfg.partitions) {
    MicroPartition mp;
    mp.weight = part.weight;
    mp.mode = part.mode;
    mp.kernel.gamma = part.gamma;
    mp.kernel.threshold = part.threshold;
    mp.kernel.schedule = part.schedule;
    const auto names = partition_group_names(cfg, part);
    mp.group_names = names;
    mp.n_groups = static_cast<int>(names.size());
    auto index_of = [&](const std::string& n) {
      for (std::size_t g = 0; g < names.size(); ++g) {
        if (names[g] == n) return static_cast<int>(g);
      }
      throw ConfigError("unknown group name '" + n + "'");
    };
    if (part.grouping == GroupingKind::Population) {
      mp.group_of = population_of;
    } else {
      mp.group_of.resize(mc.initial_opinions.size());
      for (std::size_t i = 0; i < mp.group_of.size(); ++i) {
        mp.group_of[i] = mc.initial_opinions[i] > 0.0 ? 1 : 0;
      }
    }
    if (part.mask) {
      std::vector<GroupPair> mask;
      for (const auto& [src, tgt] : *part.mask) {
        mask.push_back({index_of(src), index_of(tgt)});
      }
      mp.kernel.mask = std::move(mask);
    }
    if (part.threshold_gate) {
      mp.kernel.threshold_gate = GatePair{
          index_of(part.threshold_gate->first),
          index_of(part.threshold_gate->second)};
    }
    mc.partitions.push_back(std::move(mp));
    out.group_names.push_back(names);
  }

  out.n_steps = cfg.n_steps();
  out.save_every = cfg.integrator.save_every;
  return out;
}

MeanFieldBuild build_meanfield(const ScenarioConfig& cfg) {
  if (cfg.engine != EngineKind::MeanField) {
    throw ConfigError("scenario is not a mean-field run");
  }
  MeanFieldBuild out;
  MeanFieldConfig& mf = out.config;
  mf.dt = cfg.integrator.dt;
  for (const auto& ps : cfg.populations) {
    mf.populations.push_back({ps.name, ps.lambda,
                              ps.stubborn ? 0.0 : ps.alpha, ps.eps, ps.sigma,
                              cfg.local_kernel,
                              grid_from_spec(ps.initial, cfg.n_cells)});
  }
  const auto& part = cfg.partitions.front();
  mf.pop_kernel.gamma = part.gamma;
  mf.pop_kernel.threshold = part.threshold;
  mf.pop_kernel.schedule = part.schedule;
  auto index_of = [&](const std::string& n) {
    for (std::size_t g = 0; g < cfg.populations.size(); ++g) {
      if (cfg.populations[g].name == n) return static_cast<int>(g);
    }
    throw ConfigError("unknown population name '" + n + "'");
  };
  if (part.mask) {
    std::vector<GroupPair> mask;
    for (const auto& [src, tgt] : *part.mask) {
      mask.push_back({index_of(src), index_of(tgt)});
    }
    mf.pop_kernel.mask = std::move(mask);
  }
  if (part.threshold_gate) {
    mf.pop_kernel.threshold_gate = GatePair{
        index_of(part.threshold_gate->first),
        index_of(part.threshold_gate->second)};
  }
  out.n_steps = cfg.n_steps();
  out.save_every = cfg.integrator.save_every;
  return out;
}

}  // namespace oplab

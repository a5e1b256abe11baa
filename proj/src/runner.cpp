#include "oplab/runner.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

#include "oplab/errors.hpp"
#include "oplab/presets.hpp"
#include "oplab/version.hpp"

namespace oplab {

using nlohmann::json;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return json::parse(in);
}

int fail_validation(const std::vector<ValidationIssue>& issues,
                    std::ostream& err) {
  for (const auto& issue : issues) {
    err << (issue.path.empty() ? "<document>" : issue.path) << ": "
        << issue.rule << ": " << issue.message << "\n";
  }
  return 1;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw ConfigError("bad number in run output");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

using GroupDist = std::variant<EmpiricalDistribution, GridDensity>;

struct LoadedRun {
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<std::string> groups;  // sorted
  std::vector<std::map<std::string, GroupDist>> frames;
};

struct RawRow {
  long step;
  double t;
  std::string group;
  double value;
};

LoadedRun assemble(std::vector<RawRow> rows, bool grid) {
  LoadedRun run;
  std::map<std::string, std::vector<double>> current;
  long cur_step = 0;
  double cur_t = 0.0;
  bool have = false;
  auto flush = [&] {
    if (!have) return;
    run.steps.push_back(cur_step);
    run.times.push_back(cur_t);
    std::map<std::string, GroupDist> frame;
    for (auto& [name, values] : current) {
      if (grid) {
        frame.emplace(name, GridDensity(std::move(values)));
      } else {
        frame.emplace(name, EmpiricalDistribution(std::move(values)));
      }
    }
    run.frames.push_back(std::move(frame));
    current.clear();
  };
  for (auto& row : rows) {
    if (!have || row.step != cur_step) {
      flush();
      cur_step = row.step;
      cur_t = row.t;
      have = true;
    }
    current[row.group].push_back(row.value);
  }
  flush();
  if (!run.frames.empty()) {
    for (const auto& [name, _] : run.frames.front()) {
      run.groups.push_back(name);
    }
  }
  return run;
}

LoadedRun load_run(const std::filesystem::path& dir, std::ostream& err,
                   bool& ok) {
  ok = true;
  const json manifest = load_json_file(dir / "manifest.json");
  const std::string engine = manifest.at("engine").get<std::string>();
  const std::string format = manifest.at("format").get<std::string>();
  const bool grid = engine == "meanfield";
  const bool csv = format == "csv";
  const std::string file = grid ? (csv ? "density.csv" : "density.json")
                                : (csv ? "trajectory.csv" : "trajectory.json");

  std::vector<RawRow> rows;
  if (csv) {
    std::ifstream in(dir / file);
    if (!in) {
      err << "missing " << (dir / file).string() << "\n";
      ok = false;
      return {};
    }
    std::string line;
    std::getline(in, line);
    const auto header = split_csv(line);
    int group_col = -1;
    int value_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == (grid ? "population" : "group_0")) {
        group_col = static_cast<int>(c);
      }
      if (header[c] == (grid ? "density" : "opinion")) {
        value_col = static_cast<int>(c);
      }
    }
    if (group_col < 0 || value_col < 0) {
      err << "unrecognized columns in " << file << "\n";
      ok = false;
      return {};
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      rows.push_back({std::stol(cells[0]), parse_double(cells[1]),
                      cells[group_col], parse_double(cells[value_col])});
    }
  } else {
    const json doc = load_json_file(dir / file);
    for (const auto& row : doc) {
      rows.push_back({row.at("step").get<long>(), row.at("t").get<double>(),
                      row.at(grid ? "population" : "group_0")
                          .get<std::string>(),
                      row.at(grid ? "density" : "opinion").get<double>()});
    }
  }
  return assemble(std::move(rows), grid);
}

double dist_between(const GroupDist& a, const GroupDist& b) {
  return std::visit(
      [](const auto& x, const auto& y) -> double {
        using X = std::decay_t<decltype(x)>;
        using Y = std::decay_t<decltype(y)>;
        if constexpr (std::is_same_v<X, GridDensity> &&
                      std::is_same_v<Y, GridDensity>) {
          return w1(x, y);
        } else if constexpr (std::is_same_v<X, GridDensity>) {
          return w1(y, x);
        } else {
          return w1(x, y);
        }
      },
      a, b);
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  json doc;
  try {
    if (!opts.preset_name.empty()) {
      doc = to_json(preset(opts.preset_name));
    } else {
      doc = load_json_file(opts.scenario_path);
    }
  } catch (const json::parse_error& e) {
    err << "scenario parse error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  }

  auto validated = validate_scenario(doc);
  if (!validated.ok()) return fail_validation(validated.issues, err);
  ScenarioConfig cfg = std::move(*validated.config);
  if (opts.seed) cfg.seed = *opts.seed;

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) {
    err << "cannot create " << opts.out_dir.string() << "\n";
    return 1;
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;
  try {
    if (cfg.engine == EngineKind::Micro) {
      std::vector<MicroRunResult> trials;
      MicroBuild first_build;
      for (int t = 0; t < cfg.trials; ++t) {
        auto build = build_micro(cfg, cfg.seed + static_cast<std::uint64_t>(t));
        MicroEngine engine(build.config);
        trials.push_back(engine.run(build.n_steps, build.save_every));
        if (t == 0) first_build = std::move(build);
      }
      outputs.push_back(write_trajectory(opts.out_dir, opts.format,
                                         first_build, trials.front()));
      outputs.push_back(write_distances(opts.out_dir, opts.format,
                                        trials.front().distances,
                                        first_build.group_names));
      if (cfg.trials > 1) {
        outputs.push_back(write_histogram(opts.out_dir, opts.format,
                                          aggregate_histogram(trials)));
      }
    } else {
      auto build = build_meanfield(cfg);
      MeanFieldEngine engine(build.config);
      auto res = engine.run(build.n_steps, build.save_every);
      outputs.push_back(write_density(opts.out_dir, opts.format, build, res));
      std::vector<std::vector<std::string>> names(1);
      for (const auto& p : build.config.populations) {
        names[0].push_back(p.name);
      }
      outputs.push_back(
          write_distances(opts.out_dir, opts.format, res.distances, names));
    }
  } catch (const DegenerateNeighborhoodError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateDenominatorError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const CflError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const InvalidDistributionError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  }
  const auto stop = std::chrono::steady_clock::now();

  json manifest = {
      {"engine", cfg.engine == EngineKind::Micro ? "micro" : "meanfield"},
      {"engine_version", kEngineVersion},
      {"scenario", cfg.name},
      {"scenario_hash", hash_hex(scenario_hash(cfg))},
      {"seed", cfg.seed},
      {"trials", cfg.trials},
      {"format", opts.format == OutputFormat::Csv ? "csv" : "json"},
      {"outputs", outputs},
      {"wall_time_seconds",
       std::chrono::duration<double>(stop - start).count()}};
  write_file_atomic(opts.out_dir / "manifest.json", manifest.dump(1) + "\n");

  out << "run complete: " << (opts.out_dir / "manifest.json").string() << "\n";
  for (const auto& o : outputs) {
    out << "  " << (opts.out_dir / o).string() << "\n";
  }
  return 0;
}

int cmd_compare(const CompareOptions& opts, std::ostream& out,
                std::ostream& err) {
  LoadedRun a, b;
  try {
    bool ok = true;
    a = load_run(opts.run_a, err, ok);
    if (!ok) return 1;
    b = load_run(opts.run_b, err, ok);
    if (!ok) return 1;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }

  if (a.groups != b.groups) {
    err << "mismatched group sets between runs\n";
    return 1;
  }
  if (a.times.size() != b.times.size()) {
    err << "mismatched recorded steps between runs\n";
    return 1;
  }
  for (std::size_t f = 0; f < a.times.size(); ++f) {
    if (std::abs(a.times[f] - b.times[f]) > 1e-12) {
      err << "mismatched frame times between runs\n";
      return 1;
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) {
    err << "cannot create " << opts.out_dir.string() << "\n";
    return 1;
  }

  std::string body = "step,t,group,w1\n";
  double max_w1 = 0.0;
  json per_group = json::object();
  for (const auto& g : a.groups) per_group[g] = 0.0;
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    for (const auto& g : a.groups) {
      const double d = dist_between(a.frames[f].at(g), b.frames[f].at(g));
      body += std::to_string(a.steps[f]) + "," + format_double(a.times[f]) +
              "," + g + "," + format_double(d) + "\n";
      max_w1 = std::max(max_w1, d);
      per_group[g] = std::max(per_group[g].get<double>(), d);
    }
  }
  {
    std::ofstream csv(opts.out_dir / "compare.csv",
                      std::ios::binary | std::ios::trunc);
    csv << body;
  }
  const json summary = {{"max_w1", max_w1}, {"per_group_max", per_group}};
  write_file_atomic(opts.out_dir / "summary.json", summary.dump(1) + "\n");
  out << "compare complete: " << (opts.out_dir / "summary.json").string()
      << "\n";
  return 0;
}

int cmd_export_presets(const std::filesystem::path& dir, std::ostream& out,
                       std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "cannot create " << dir.string() << "\n";
    return 1;
  }
  for (const auto& name : preset_names()) {
    write_file_atomic(dir / (name + ".json"),
                      to_json(preset(name)).dump(1) + "\n");
  }
  out << "wrote " << preset_names().size() << " presets to " << dir.string()
      << "\n";
  return 0;
}

}  // namespace oplab

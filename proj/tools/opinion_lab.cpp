#include <iostream>

#include "CLI11.hpp"
#include "oplab/presets.hpp"
#include "oplab/runner.hpp"
#include "oplab/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"opinion-lab: multi-population bounded-confidence simulator"};
  app.set_version_flag("--version", oplab::kEngineVersion);
  app.require_subcommand(1);

  oplab::RunOptions run_opts;
  std::string format = "csv";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run a scenario file or preset");
  run->add_option("scenario", run_opts.scenario_path, "scenario file (JSON)");
  run->add_option("--preset", run_opts.preset_name, "named preset");
  auto* seed_opt =
      run->add_option("--seed", seed, "run seed (default 0)");
  run->add_option("--out", run_opts.out_dir, "output directory")->required();
  run->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  oplab::CompareOptions cmp_opts;
  auto* cmp = app.add_subcommand("compare",
                                 "per-step W1 between two finished runs");
  cmp->add_option("run_a", cmp_opts.run_a, "first run directory")->required();
  cmp->add_option("run_b", cmp_opts.run_b, "second run directory")->required();
  cmp->add_option("--out", cmp_opts.out_dir, "report directory")->required();

  std::string export_dir;
  auto* presets = app.add_subcommand("presets", "list or export presets");
  presets->add_option("--export", export_dir, "write preset files here");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (run_opts.scenario_path.empty() == run_opts.preset_name.empty()) {
      std::cerr << "pass exactly one of a scenario file or --preset\n";
      return 1;
    }
    run_opts.seed = seed_opt->count() > 0
                        ? std::optional<std::uint64_t>(seed)
                        : std::nullopt;
    run_opts.format = format == "csv" ? oplab::OutputFormat::Csv
                                      : oplab::OutputFormat::Json;
    return oplab::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (cmp->parsed()) {
    return oplab::cmd_compare(cmp_opts, std::cout, std::cerr);
  }
  if (presets->parsed()) {
    if (!export_dir.empty()) {
      return oplab::cmd_export_presets(export_dir, std::cout, std::cerr);
    }
    for (const auto& name : oplab::preset_names()) {
      std::cout << name << "\n";
    }
    return 0;
  }
  return 0;
}

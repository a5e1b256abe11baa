#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "oplab/output.hpp"

namespace oplab {

struct RunOptions {
  std::string scenario_path;  // one of scenario_path / preset_name
  std::string preset_name;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::filesystem::path out_dir;
  OutputFormat format = OutputFormat::Csv;
};

// Runs a scenario and writes trajectory/density, distances, the trial
// histogram (trials > 1) and the manifest under out_dir. Exit codes:
// 0 success, 1 validation or input failure (details on err), 2 runtime
// numeric failure.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::filesystem::path run_a;
  std::filesystem::path run_b;
  std::filesystem::path out_dir;
};

// Per-step W1 between matching groups of two finished runs, plus the
// maximum. Exit 1 on mismatched group sets or time grids.
int cmd_compare(const CompareOptions& opts, std::ostream& out,
                std::ostream& err);

// Writes every preset as a scenario file under dir.
int cmd_export_presets(const std::filesystem::path& dir, std::ostream& out,
                       std::ostream& err);

}  // namespace oplab

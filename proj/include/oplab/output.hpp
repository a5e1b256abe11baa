#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "oplab/meanfield.hpp"
#include "oplab/scenario.hpp"

namespace oplab {

enum class OutputFormat { Csv, Json };

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Per-frame opinion histogram over [-1, 1], averaged across trials and
// normalized to unit mass.
struct TrialHistogram {
  std::vector<long> frame_steps;
  std::vector<double> frame_times;
  std::vector<std::vector<double>> density;  // per frame, per bin
  int bins = 40;
  int trials = 0;
};
TrialHistogram aggregate_histogram(const std::vector<MicroRunResult>& runs,
                                   int bins = 40);

// Writers return the written file's name (relative to dir).
std::string write_trajectory(const std::filesystem::path& dir,
                             OutputFormat fmt, const MicroBuild& build,
                             const MicroRunResult& res);
std::string write_distances(const std::filesystem::path& dir, OutputFormat fmt,
                            const std::vector<DistanceRecord>& records,
                            const std::vector<std::vector<std::string>>&
                                group_names);
std::string write_density(const std::filesystem::path& dir, OutputFormat fmt,
                          const MeanFieldBuild& build,
                          const MeanFieldRunResult& res);
std::string write_histogram(const std::filesystem::path& dir, OutputFormat fmt,
                            const TrialHistogram& hist);

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace oplab

#include "oplab/output.hpp"

#include <charconv>
#include <fstream>

#include "oplab/errors.hpp"

namespace oplab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

TrialHistogram aggregate_histogram(const std::vector<MicroRunResult>& runs,
                                   int bins) {
  TrialHistogram hist;
  hist.bins = bins;
  hist.trials = static_cast<int>(runs.size());
  if (runs.empty()) return hist;
  hist.frame_steps = runs.front().frame_steps;
  hist.frame_times = runs.front().frame_times;
  const double width = 2.0 / bins;
  hist.density.assign(hist.frame_steps.size(),
                      std::vector<double>(bins, 0.0));
  for (const auto& run : runs) {
    for (std::size_t f = 0; f < run.frames.size(); ++f) {
      for (double x : run.frames[f]) {
        auto bin = static_cast<int>((x + 1.0) / width);
        if (bin >= bins) bin = bins - 1;
        if (bin < 0) bin = 0;
        hist.density[f][bin] += 1.0;
      }
    }
  }
  for (auto& frame : hist.density) {
    double total = 0.0;
    for (double c : frame) total += c;
    if (total > 0.0) {
      for (double& c : frame) c /= total * width;
    }
  }
  return hist;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
}

}  // namespace

std::string write_trajectory(const std::filesystem::path& dir,
                             OutputFormat fmt, const MicroBuild& build,
                             const MicroRunResult& res) {
  const std::size_t n_parts = build.group_names.size();
  if (fmt == OutputFormat::Csv) {
    std::string body = "step,t,agent_id";
    for (std::size_t r = 0; r < n_parts; ++r) {
      body += ",group_" + std::to_string(r);
    }
    body += ",opinion\n";
    for (std::size_t f = 0; f < res.frames.size(); ++f) {
      const std::string prefix = std::to_string(res.frame_steps[f]) + "," +
                                 format_double(res.frame_times[f]) + ",";
      for (std::size_t i = 0; i < res.frames[f].size(); ++i) {
        body += prefix + std::to_string(i);
        for (std::size_t r = 0; r < n_parts; ++r) {
          body += "," +
                  build.group_names[r][build.config.partitions[r].group_of[i]];
        }
        body += "," + format_double(res.frames[f][i]) + "\n";
      }
    }
    write_text(dir / "trajectory.csv", body);
    return "trajectory.csv";
  }
  json rows = json::array();
  for (std::size_t f = 0; f < res.frames.size(); ++f) {
    for (std::size_t i = 0; i < res.frames[f].size(); ++i) {
      json row = {{"step", res.frame_steps[f]},
                  {"t", res.frame_times[f]},
                  {"agent_id", i},
                  {"opinion", res.frames[f][i]}};
      for (std::size_t r = 0; r < n_parts; ++r) {
        row["group_" + std::to_string(r)] =
            build.group_names[r][build.config.partitions[r].group_of[i]];
      }
      rows.push_back(std::move(row));
    }
  }
  write_text(dir / "trajectory.json", rows.dump(1));
  return "trajectory.json";
}

std::string write_distances(
    const std::filesystem::path& dir, OutputFormat fmt,
    const std::vector<DistanceRecord>& records,
    const std::vector<std::vector<std::string>>& group_names) {
  if (fmt == OutputFormat::Csv) {
    std::string body = "step,t,partition,group_a,group_b,w1\n";
    for (const auto& d : records) {
      body += std::to_string(d.step) + "," + format_double(d.t) + "," +
              std::to_string(d.partition) + "," +
              group_names[d.partition][d.group_a] + "," +
              group_names[d.partition][d.group_b] + "," +
              format_double(d.w1) + "\n";
    }
    write_text(dir / "distances.csv", body);
    return "distances.csv";
  }
  json rows = json::array();
  for (const auto& d : records) {
    rows.push_back({{"step", d.step},
                    {"t", d.t},
                    {"partition", d.partition},
                    {"group_a", group_names[d.partition][d.group_a]},
                    {"group_b", group_names[d.partition][d.group_b]},
                    {"w1", d.w1}});
  }
  write_text(dir / "distances.json", rows.dump(1));
  return "distances.json";
}

std::string write_density(const std::filesystem::path& dir, OutputFormat fmt,
                          const MeanFieldBuild& build,
                          const MeanFieldRunResult& res) {
  const auto& pops = build.config.populations;
  if (fmt == OutputFormat::Csv) {
    std::string body = "step,t,population,cell_center,density\n";
    for (std::size_t f = 0; f < res.frames.size(); ++f) {
      const std::string prefix = std::to_string(res.frame_steps[f]) + "," +
                                 format_double(res.frame_times[f]) + ",";
      for (std::size_t k = 0; k < res.frames[f].size(); ++k) {
        const auto& rho = res.frames[f][k];
        for (std::size_t c = 0; c < rho.n_cells(); ++c) {
          body += prefix + pops[k].name + "," +
                  format_double(rho.cell_center(c)) + "," +
                  format_double(rho.values()[c]) + "\n";
        }
      }
    }
    write_text(dir / "density.csv", body);
    return "density.csv";
  }
  json rows = json::array();
  for (std::size_t f = 0; f < res.frames.size(); ++f) {
    for (std::size_t k = 0; k < res.frames[f].size(); ++k) {
      const auto& rho = res.frames[f][k];
      for (std::size_t c = 0; c < rho.n_cells(); ++c) {
        rows.push_back({{"step", res.frame_steps[f]},
                        {"t", res.frame_times[f]},
                        {"population", pops[k].name},
                        {"cell_center", rho.cell_center(c)},
                        {"density", rho.values()[c]}});
      }
    }
  }
  write_text(dir / "density.json", rows.dump(1));
  return "density.json";
}

std::string write_histogram(const std::filesystem::path& dir, OutputFormat fmt,
                            const TrialHistogram& hist) {
  const double width = 2.0 / hist.bins;
  if (fmt == OutputFormat::Csv) {
    std::string body = "step,t,bin_center,density\n";
    for (std::size_t f = 0; f < hist.density.size(); ++f) {
      const std::string prefix = std::to_string(hist.frame_steps[f]) + "," +
                                 format_double(hist.frame_times[f]) + ",";
      for (int b = 0; b < hist.bins; ++b) {
        const double center = -1.0 + (b + 0.5) * width;
        body += prefix + format_double(center) + "," +
                format_double(hist.density[f][b]) + "\n";
      }
    }
    write_text(dir / "histogram.csv", body);
    return "histogram.csv";
  }
  json rows = json::array();
  for (std::size_t f = 0; f < hist.density.size(); ++f) {
    for (int b = 0; b < hist.bins; ++b) {
      rows.push_back({{"step", hist.frame_steps[f]},
                      {"t", hist.frame_times[f]},
                      {"bin_center", -1.0 + (b + 0.5) * width},
                      {"density", hist.density[f][b]}});
    }
  }
  write_text(dir / "histogram.json", rows.dump(1));
  return "histogram.json";
}

}  // namespace oplab

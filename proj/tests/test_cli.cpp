#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oplab/presets.hpp"
#include "oplab/runner.hpp"
#include "oplab/scenario.hpp"

using namespace oplab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("oplab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_preset_to(const std::string& preset, const fs::path& out,
                  std::uint64_t seed, OutputFormat fmt = OutputFormat::Csv) {
  RunOptions opts;
  opts.preset_name = preset;
  opts.seed = seed;
  opts.out_dir = out;
  opts.format = fmt;
  std::ostringstream log, err;
  const int rc = cmd_run(opts, log, err);
  INFO(err.str());
  return rc;
}

}  // namespace

TEST_CASE("run writes trajectory, distances and manifest") {
  const auto dir = fresh_dir("run");
  REQUIRE(run_preset_to("basic-kernels", dir, 7) == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "distances.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("identical seeds give byte-identical data files") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  REQUIRE(run_preset_to("basic-kernels", a, 7) == 0);
  REQUIRE(run_preset_to("basic-kernels", b, 7) == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "distances.csv") == slurp(b / "distances.csv"));
}

TEST_CASE("missing scenario file exits 1") {
  RunOptions opts;
  opts.scenario_path = "missing.toml";
  opts.out_dir = fresh_dir("missing");
  std::ostringstream log, err;
  CHECK(cmd_run(opts, log, err) == 1);
  CHECK(!err.str().empty());
}

TEST_CASE("validation failures exit 1 and name the rule") {
  const auto dir = fresh_dir("invalid");
  const auto scenario = dir / "bad.json";
  {
    std::ofstream out(scenario);
    out << R"({"engine":"micro","integrator":{"t_end":-5},)"
        << R"("populations":[{"name":"a","size":3,)"
        << R"("initial":{"kind":"dirac","x":0}}]})";
  }
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = dir / "out";
  std::ostringstream log, err;
  CHECK(cmd_run(opts, log, err) == 1);
  CHECK(err.str().find("t-end-positive") != std::string::npos);
}

TEST_CASE("unknown preset exits 1") {
  RunOptions opts;
  opts.preset_name = "nope";
  opts.out_dir = fresh_dir("nopreset");
  std::ostringstream log, err;
  CHECK(cmd_run(opts, log, err) == 1);
}

TEST_CASE("stdout log carries paths, not numbers from the results") {
  const auto dir = fresh_dir("quiet");
  RunOptions opts;
  opts.preset_name = "basic-kernels";
  opts.seed = 3;
  opts.out_dir = dir;
  std::ostringstream log, err;
  REQUIRE(cmd_run(opts, log, err) == 0);
  CHECK(log.str().find("manifest.json") != std::string::npos);
  CHECK(log.str().find("w1") == std::string::npos);
}

TEST_CASE("compare of a run against itself is all zeros") {
  const auto dir = fresh_dir("self");
  REQUIRE(run_preset_to("in-group-bias", dir, 7) == 0);
  const auto out = fresh_dir("self_cmp");
  CompareOptions cmp{dir, dir, out};
  std::ostringstream log, err;
  REQUIRE(cmd_compare(cmp, log, err) == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["max_w1"].get<double>() == 0.0);
  CHECK(fs::exists(out / "compare.csv"));
}

TEST_CASE("compare rejects mismatched group sets") {
  const auto a = fresh_dir("mm_a");
  const auto b = fresh_dir("mm_b");
  REQUIRE(run_preset_to("in-group-bias", a, 7) == 0);
  REQUIRE(run_preset_to("basic-kernels", b, 7) == 0);
  CompareOptions cmp{a, b, fresh_dir("mm_out")};
  std::ostringstream log, err;
  CHECK(cmd_compare(cmp, log, err) == 1);
}

TEST_CASE("compare rejects mismatched time grids") {
  const auto dir = fresh_dir("grid_mismatch");
  auto doc = to_json(preset("basic-kernels"));
  doc["integrator"]["t_end"] = 2.0;
  {
    std::ofstream out(dir / "a.json");
    out << doc.dump();
  }
  doc["integrator"]["save_every"] = 10;
  {
    std::ofstream out(dir / "b.json");
    out << doc.dump();
  }
  auto run_file = [&](const fs::path& scenario, const fs::path& out) {
    RunOptions opts;
    opts.scenario_path = scenario.string();
    opts.seed = 2;
    opts.out_dir = out;
    std::ostringstream log, err;
    REQUIRE(cmd_run(opts, log, err) == 0);
  };
  run_file(dir / "a.json", dir / "ra");
  run_file(dir / "b.json", dir / "rb");
  CompareOptions cmp{dir / "ra", dir / "rb", dir / "out"};
  std::ostringstream log, err;
  CHECK(cmd_compare(cmp, log, err) == 1);
}

TEST_CASE("json format mirrors the csv records") {
  const auto dir = fresh_dir("jsonfmt");
  REQUIRE(run_preset_to("basic-kernels", dir, 7, OutputFormat::Json) == 0);
  CHECK(fs::exists(dir / "trajectory.json"));
  CHECK(fs::exists(dir / "distances.json"));
  const auto rows = nlohmann::json::parse(slurp(dir / "trajectory.json"));
  REQUIRE(rows.is_array());
  CHECK(rows[0].contains("opinion"));
  CHECK(rows[0].contains("group_0"));
}

TEST_CASE("compare works across formats and engines") {
  const auto a = fresh_dir("fmt_a");
  const auto b = fresh_dir("fmt_b");
  REQUIRE(run_preset_to("isolated-vs-integrated-meanfield", a, 7) == 0);
  REQUIRE(run_preset_to("isolated-vs-integrated-meanfield", b, 7,
                        OutputFormat::Json) == 0);
  CompareOptions cmp{a, b, fresh_dir("fmt_out")};
  std::ostringstream log, err;
  REQUIRE(cmd_compare(cmp, log, err) == 0);
  const auto summary = nlohmann::json::parse(slurp(a.parent_path() /
                                                   "oplab_cli_fmt_out" /
                                                   "summary.json"));
  CHECK(summary["max_w1"].get<double>() <= 1e-12);
}

TEST_CASE("preset export writes loadable scenario files") {
  const auto dir = fresh_dir("export");
  std::ostringstream log, err;
  REQUIRE(cmd_export_presets(dir, log, err) == 0);
  CHECK(fs::exists(dir / "in-group-bias.json"));
  const auto doc = nlohmann::json::parse(slurp(dir / "in-group-bias.json"));
  CHECK(validate_scenario(doc).ok());
}

TEST_CASE("multi-trial runs add an aggregated histogram to the manifest") {
  const auto dir = fresh_dir("trials");
  const auto scenario = dir / "trials.json";
  {
    auto doc = to_json(preset("resistance"));
    doc["trials"] = 3;  // trimmed copy of the 50-trial study
    doc["populations"][0]["size"] = 60;
    std::ofstream out(scenario);
    out << doc.dump();
  }
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.seed = 1;
  opts.out_dir = dir / "out";
  std::ostringstream log, err;
  REQUIRE(cmd_run(opts, log, err) == 0);
  const auto manifest =
      nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["trials"].get<int>() == 3);
  bool lists_histogram = false;
  for (const auto& o : manifest["outputs"]) {
    if (o.get<std::string>() == "histogram.csv") lists_histogram = true;
  }
  CHECK(lists_histogram);
  // Bins of one frame integrate to one.
  std::ifstream hist(dir / "out" / "histogram.csv");
  std::string line;
  std::getline(hist, line);  // header
  double mass = 0.0;
  for (int b = 0; b < 40; ++b) {
    std::getline(hist, line);
    mass += std::stod(line.substr(line.rfind(',') + 1)) * (2.0 / 40);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compare: finer micro runs sit closer to the mean-field run") {
  const auto dir = fresh_dir("consistency");
  auto write_scenario = [&](const std::string& engine, std::size_t size,
                            const fs::path& path) {
    nlohmann::json doc = {
        {"engine", engine},
        {"integrator", {{"t_end", 5.0}, {"save_every", 100}}},
        {"local_kernel", {{"kind", "uniform"}}},
        {"populations",
         nlohmann::json::array(
             {{{"name", "p"},
               {"initial",
                {{"kind", "truncated_gaussian"},
                 {"mean", 0.15},
                 {"std", 0.25},
                 {"lo", -1.0},
                 {"hi", 1.0}}},
               {"alpha", 0.5},
               {"eps", 0.5}}})}};
    if (engine == "micro") {
      doc["populations"][0]["size"] = size;
    } else {
      doc["populations"][0]["lambda"] = 1.0;
    }
    std::ofstream out(path);
    out << doc.dump();
  };
  write_scenario("micro", 50, dir / "micro50.json");
  write_scenario("micro", 1000, dir / "micro1000.json");
  write_scenario("meanfield", 0, dir / "mf.json");

  auto run_file = [&](const fs::path& scenario, const fs::path& out) {
    RunOptions opts;
    opts.scenario_path = scenario.string();
    opts.seed = 5;
    opts.out_dir = out;
    std::ostringstream log, err;
    REQUIRE(cmd_run(opts, log, err) == 0);
  };
  run_file(dir / "micro50.json", dir / "m50");
  run_file(dir / "micro1000.json", dir / "m1000");
  run_file(dir / "mf.json", dir / "mf");

  auto max_w1 = [&](const fs::path& a, const fs::path& b,
                    const fs::path& out) {
    CompareOptions cmp{a, b, out};
    std::ostringstream log, err;
    REQUIRE(cmd_compare(cmp, log, err) == 0);
    return nlohmann::json::parse(slurp(out / "summary.json"))["max_w1"]
        .get<double>();
  };
  const double coarse = max_w1(dir / "m50", dir / "mf", dir / "cmp50");
  const double fine = max_w1(dir / "m1000", dir / "mf", dir / "cmp1000");
  CHECK(fine < coarse);
}

TEST_CASE("mean-field histogram of trials is rejected by validation") {
  const auto dir = fresh_dir("mf_trials");
  const auto scenario = dir / "bad.json";
  {
    std::ofstream out(scenario);
    out << R"({"engine":"meanfield","trials":3,"integrator":{"t_end":1},)"
        << R"("populations":[{"name":"a","lambda":1.0,)"
        << R"("initial":{"kind":"uniform","a":-0.5,"b":0.5}}]})";
  }
  RunOptions opts;
  opts.scenario_path = scenario.string();
  opts.out_dir = dir / "out";
  std::ostringstream log, err;
  CHECK(cmd_run(opts, log, err) == 1);
  CHECK(err.str().find("meanfield-trials") != std::string::npos);
}

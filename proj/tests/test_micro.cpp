#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"
#include "oplab/distributions.hpp"
#include "oplab/errors.hpp"
#include "oplab/micro.hpp"

using namespace oplab;

namespace {

MicroPartition single_group(std::size_t n) {
  MicroPartition p;
  p.group_of.assign(n, 0);
  p.n_groups = 1;
  p.weight = 1.0;
  return p;
}

MicroConfig basic_config(std::vector<double> x, double alpha, double eps,
                         LocalKernelSpec kernel = {}) {
  MicroConfig cfg;
  const std::size_t n = x.size();
  cfg.initial_opinions = std::move(x);
  cfg.agents.assign(n, AgentParams{alpha, eps, 1.0,
                                   std::numeric_limits<double>::infinity()});
  cfg.partitions.push_back(single_group(n));
  cfg.local_kernel = kernel;
  return cfg;
}

// Reference step for the single-population dynamics, written directly from
// the difference form with ascending-index sums.
std::vector<double> reference_step(const std::vector<double>& x, double alpha,
                                   double eps, double dt) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double kap = std::abs(x[i] - x[j]) <= eps ? 1.0 : 0.0;
      if (kap == 0.0) continue;
      z += kap;
      acc += kap * (x[j] - x[i]);
    }
    const double f = alpha * (acc / z);
    out[i] = std::clamp(x[i] + dt * f, -1.0, 1.0);
  }
  return out;
}

std::vector<double> random_opinions(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace

TEST_CASE("drift of a symmetric two-agent pair") {
  auto cfg = basic_config({-0.5, 0.5}, 1.0, 2.0);
  MicroEngine engine(cfg);
  CHECK(engine.drift(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(engine.drift(1) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("drift of an isolated agent is zero") {
  auto cfg = basic_config({-0.9, 0.9}, 1.0, 0.3);
  MicroEngine engine(cfg);
  CHECK(engine.drift(0) == 0.0);
  CHECK(engine.drift(1) == 0.0);
}

TEST_CASE("drift on the three-agent hand-enumerated instance") {
  // Neighbor sets {0,1}, {0,1}, {2} under eps = 0.3.
  auto cfg = basic_config({0.0, 0.2, 0.9}, 1.0, 0.3);
  MicroEngine engine(cfg);
  CHECK(engine.drift(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(engine.drift(1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(engine.drift(2) == 0.0);
}

TEST_CASE("degenerate neighborhood throws instead of returning zero") {
  std::vector<double> x{0.0, 0.5};
  std::vector<AgentParams> agents(2, AgentParams{0.5, 0.3, 1.0,
                                   std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(
      detail::drift_with_weights(x, agents, 0, [](int, int) { return 0.0; },
                                 3),
      DegenerateNeighborhoodError);
  try {
    detail::drift_with_weights(x, agents, 1, [](int, int) { return 0.0; }, 7);
  } catch (const DegenerateNeighborhoodError& e) {
    CHECK(e.agent == 1);
    CHECK(e.step == 7);
  }
}

TEST_CASE("fully stubborn population is bitwise frozen") {
  auto cfg = basic_config({-0.7, 0.1, 0.8}, 0.0, 2.0);
  cfg.dt = 0.7;
  MicroEngine engine(cfg);
  const auto before = engine.opinions();
  for (int s = 0; s < 25; ++s) engine.step();
  CHECK(engine.opinions() == before);
}

TEST_CASE("full connectivity preserves the mean") {
  std::mt19937_64 rng(3);
  auto cfg = basic_config(random_opinions(rng, 40), 0.3, 2.0);
  MicroEngine engine(cfg);
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m0 = mean(engine.opinions());
  engine.step();
  CHECK(std::abs(mean(engine.opinions()) - m0) <= 1e-12);
}

TEST_CASE("disjoint agents stay put") {
  auto cfg = basic_config({-0.5, 0.5}, 1.0, 0.4);
  cfg.dt = 0.9;
  MicroEngine engine(cfg);
  const auto before = engine.opinions();
  for (int s = 0; s < 10; ++s) engine.step();
  CHECK(engine.opinions() == before);
}

TEST_CASE("single agent runs a constant trajectory") {
  auto cfg = basic_config({0.3}, 0.5, 0.6);
  MicroEngine engine(cfg);
  auto res = engine.run(100, 10);
  for (const auto& f : res.frames) CHECK(f[0] == 0.3);
}

TEST_CASE("engine step matches the independently coded reference step") {
  std::mt19937_64 rng(11);
  auto x = random_opinions(rng, 23);
  auto cfg = basic_config(x, 0.25, 0.5);
  MicroEngine engine(cfg);
  auto expect = x;
  for (int s = 0; s < 50; ++s) {
    expect = reference_step(expect, 0.25, 0.5, cfg.dt);
    engine.step();
  }
  CHECK(engine.opinions() == expect);  // bitwise
}

TEST_CASE("exponential kernel reduction is also bitwise") {
  std::mt19937_64 rng(37);
  auto x = random_opinions(rng, 17);
  auto cfg = basic_config(
      x, 0.3, 0.5,
      LocalKernelSpec{.kind = LocalKernelKind::Exponential, .gamma = 1.4,
                      .alpha = 1.0});
  MicroEngine engine(cfg);
  auto expect = x;
  for (int s = 0; s < 30; ++s) {
    std::vector<double> next(expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      double z = 0.0;
      double acc = 0.0;
      for (std::size_t j = 0; j < expect.size(); ++j) {
        const double d = std::abs(expect[i] - expect[j]);
        if (d > 0.5) continue;
        const double kap = std::exp(-1.4 * d);
        z += kap;
        acc += kap * (expect[j] - expect[i]);
      }
      next[i] = std::clamp(expect[i] + cfg.dt * (0.3 * (acc / z)), -1.0, 1.0);
    }
    expect = std::move(next);
    engine.step();
  }
  CHECK(engine.opinions() == expect);
}

TEST_CASE("uniform kernel reduces to the neighbor-average update") {
  std::mt19937_64 rng(13);
  auto x = random_opinions(rng, 31);
  auto cfg = basic_config(x, 0.4, 0.3);
  MicroEngine engine(cfg);
  engine.step();
  // Hegselmann-Krause style surface form: x + dt*a*(mean of neighbors - x).
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (std::abs(x[i] - x[j]) <= 0.3) {
        sum += x[j];
        ++count;
      }
    }
    const double hk = x[i] + cfg.dt * 0.4 * (sum / count - x[i]);
    CHECK(engine.opinions()[i] == doctest::Approx(hk).epsilon(1e-12));
  }
}

TEST_CASE("closed-form consensus under full connectivity") {
  std::mt19937_64 rng(17);
  auto x0 = random_opinions(rng, 10);
  auto cfg = basic_config(x0, 0.1, 2.0);
  cfg.dt = 1e-3;
  MicroEngine engine(cfg);
  double xbar = 0.0;
  for (double v : x0) xbar += v;
  xbar /= static_cast<double>(x0.size());
  for (int s = 0; s < 10000; ++s) engine.step();
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double expect = xbar + (x0[i] - xbar) * std::exp(-0.1 * 10.0);
    CHECK(std::abs(engine.opinions()[i] - expect) <= 1e-4);
  }
}

TEST_CASE("rk4 tracks the closed form more tightly at coarse dt") {
  std::mt19937_64 rng(19);
  auto x0 = random_opinions(rng, 8);
  auto cfg = basic_config(x0, 0.1, 2.0);
  cfg.dt = 0.05;
  cfg.method = StepMethod::Rk4;
  MicroEngine engine(cfg);
  double xbar = 0.0;
  for (double v : x0) xbar += v;
  xbar /= static_cast<double>(x0.size());
  for (int s = 0; s < 200; ++s) engine.step();
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double expect = xbar + (x0[i] - xbar) * std::exp(-0.1 * 10.0);
    CHECK(std::abs(engine.opinions()[i] - expect) <= 1e-8);
  }
}

TEST_CASE("confinement and hull monotonicity on random scenarios") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> nn(2, 40);
  std::uniform_real_distribution<double> ue(0.1, 2.0);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  for (int sc = 0; sc < 25; ++sc) {
    const auto kind = static_cast<LocalKernelKind>(sc % 4);
    auto cfg = basic_config(
        random_opinions(rng, nn(rng)), ua(rng), ue(rng),
        LocalKernelSpec{.kind = kind, .gamma = 1.0 + ua(rng), .alpha = 2.0});
    MicroEngine engine(cfg);
    double lo = *std::min_element(cfg.initial_opinions.begin(),
                                  cfg.initial_opinions.end());
    double hi = *std::max_element(cfg.initial_opinions.begin(),
                                  cfg.initial_opinions.end());
    for (int s = 0; s < 100; ++s) {
      engine.step();
      const auto& x = engine.opinions();
      const double mn = *std::min_element(x.begin(), x.end());
      const double mx = *std::max_element(x.begin(), x.end());
      REQUIRE(mn >= -1.0);
      REQUIRE(mx <= 1.0);
      REQUIRE(mn >= lo - 1e-12);
      REQUIRE(mx <= hi + 1e-12);
      lo = std::max(lo, mn);
      hi = std::min(hi, mx);
    }
  }
}

TEST_CASE("frozen cross-group weights stay at their initial values") {
  // Two separated groups; Dirac-like initial distributions with W1 = 1.
  MicroConfig cfg;
  cfg.initial_opinions = {-0.5, -0.5, 0.5, 0.5};
  cfg.agents.assign(4, AgentParams{0.5, 2.0, 10.0,
                                   std::numeric_limits<double>::infinity()});
  MicroPartition part;
  part.group_of = {0, 0, 1, 1};
  part.n_groups = 2;
  part.kernel.gamma = 1.0;
  part.mode = WeightMode::Frozen;
  cfg.partitions.push_back(part);
  MicroEngine frozen(cfg);

  cfg.partitions[0].mode = WeightMode::Live;
  MicroEngine live(cfg);

  // Under frozen weights the cross pull keeps its t=0 strength while the
  // live run strengthens as the groups approach; trajectories must diverge.
  for (int s = 0; s < 40; ++s) {
    frozen.step();
    live.step();
  }
  CHECK(frozen.opinions() != live.opinions());

  // Identity-invariant weights: recomputing distances by hand shows the
  // engine still applies exp(-1) to cross pairs; the live engine does not.
  const double cross_frozen = std::exp(-1.0);
  const double w_live = live.group_w1(0)[1];
  CHECK(w_live < 1.0);
  // Frozen engine drift of agent 0 equals the hand formula with exp(-1).
  const auto& x = frozen.opinions();
  double z = 0.0, acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double kw = (j < 2) ? 1.0 : cross_frozen;
    z += kw;
    acc += kw * (x[j] - x[0]);
  }
  CHECK(frozen.drift(0) == doctest::Approx(0.5 * acc / z).epsilon(1e-12));
}

TEST_CASE("recomputed group weights from example cases") {
  // Two identical groups, live mode: every pairwise W1 is zero.
  MicroConfig cfg;
  cfg.initial_opinions = {-0.2, 0.1, -0.2, 0.1};
  cfg.agents.assign(4, AgentParams{0.5, 2.0, 10.0,
                                   std::numeric_limits<double>::infinity()});
  MicroPartition part;
  part.group_of = {0, 0, 1, 1};
  part.n_groups = 2;
  part.kernel.gamma = 2.0;
  part.mode = WeightMode::Live;
  cfg.partitions.push_back(part);
  MicroEngine engine(cfg);
  const auto d = engine.group_w1(0);
  CHECK(d[1] == 0.0);
  CHECK(engine.drift(0) ==
        doctest::Approx(0.5 * ((0.1 - -0.2) * 2.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("scoped agent cannot see a distant group") {
  // Owner at 0 with scope 0.2; the other group sits at 0.9.
  MicroConfig cfg;
  cfg.initial_opinions = {0.0, 0.05, 0.9, 0.9};
  cfg.agents.assign(4, AgentParams{0.5, 0.1, 10.0, 0.2});
  MicroPartition part;
  part.group_of = {0, 0, 1, 1};
  part.n_groups = 2;
  part.kernel.gamma = 0.0;
  part.mode = WeightMode::Live;
  cfg.partitions.push_back(part);
  MicroEngine engine(cfg);
  // Drift of agent 0: only its own group is observable; group 1 carries
  // zero weight even though gamma = 0 would give weight one globally.
  const double f0 = engine.drift(0);
  CHECK(f0 == doctest::Approx(0.5 * 0.05 / 2.0).epsilon(1e-12));
}

TEST_CASE("multi-identity with weights (1, 0) reduces bitwise") {
  std::mt19937_64 rng(29);
  auto x = random_opinions(rng, 30);

  MicroConfig single;
  single.initial_opinions = x;
  single.agents.assign(30, AgentParams{0.5, 0.6, 10.0,
                                       std::numeric_limits<double>::infinity()});
  MicroPartition p0;
  p0.group_of.assign(30, 0);
  for (int i = 0; i < 15; ++i) p0.group_of[i] = 1;
  p0.n_groups = 2;
  p0.kernel.gamma = 2.0;
  p0.mode = WeightMode::Frozen;
  p0.weight = 1.0;
  single.partitions.push_back(p0);

  MicroConfig multi = single;
  MicroPartition p1;
  p1.group_of.assign(30, 0);
  for (int i = 0; i < 30; ++i) p1.group_of[i] = x[i] > 0.0 ? 1 : 0;
  p1.n_groups = 2;
  p1.kernel.gamma = 5.0;
  p1.mode = WeightMode::Live;
  p1.weight = 0.0;
  multi.partitions[0].weight = 1.0;
  multi.partitions.push_back(p1);

  MicroEngine a(single), b(multi);
  for (int s = 0; s < 60; ++s) {
    a.step();
    b.step();
  }
  CHECK(a.opinions() == b.opinions());  // bitwise
}

TEST_CASE("asymmetric mask on a four-agent instance") {
  // p1 = {0, 1} around -0.5, p2 = {2, 3} around 0.5. The mask lets p1
  // influence p2 only; p1 runs exactly as its decoupled baseline.
  MicroConfig coupled;
  coupled.initial_opinions = {-0.6, -0.4, 0.4, 0.6};
  coupled.agents.assign(4, AgentParams{0.5, 2.0, 10.0,
                                       std::numeric_limits<double>::infinity()});
  MicroPartition part;
  part.group_of = {0, 0, 1, 1};
  part.n_groups = 2;
  part.kernel.gamma = 0.0;
  part.kernel.mask = std::vector<GroupPair>{{0, 1}};  // p1 -> p2
  part.mode = WeightMode::Frozen;
  coupled.partitions.push_back(part);

  MicroConfig baseline = coupled;
  baseline.partitions[0].kernel.mask = std::vector<GroupPair>{};  // no cross

  MicroEngine run(coupled), ref(baseline);

  // Hand enumeration of the first drifts: agent 2 weighs {2, 3} at 1 and
  // {0, 1} at 1 (mask applies, gamma = 0); agent 0 weighs only {0, 1}.
  CHECK(run.drift(0) == doctest::Approx(0.5 * 0.2 / 2.0).epsilon(1e-12));
  const double f2 =
      0.5 * ((-1.0) + (-0.8) + 0.2) / 4.0;  // differences to x2 = 0.4
  CHECK(run.drift(2) == doctest::Approx(f2).epsilon(1e-12));

  for (int s = 0; s < 80; ++s) {
    run.step();
    ref.step();
  }
  CHECK(run.opinions()[0] == ref.opinions()[0]);
  CHECK(run.opinions()[1] == ref.opinions()[1]);
  // p2 got pulled toward p1.
  const double p2_run = 0.5 * (run.opinions()[2] + run.opinions()[3]);
  const double p2_ref = 0.5 * (ref.opinions()[2] + ref.opinions()[3]);
  CHECK(p2_run < p2_ref - 0.05);
}

TEST_CASE("identical runs are bitwise identical across worker counts") {
  std::mt19937_64 rng(31);
  auto x = random_opinions(rng, 200);
  auto run_with = [&](const char* threads) {
    setenv("OPINION_LAB_THREADS", threads, 1);
    auto cfg = basic_config(
        x, 0.4, 0.5,
        LocalKernelSpec{.kind = LocalKernelKind::Exponential, .gamma = 1.0,
                        .alpha = 2.0});
    MicroEngine engine(cfg);
    for (int s = 0; s < 30; ++s) engine.step();
    unsetenv("OPINION_LAB_THREADS");
    return engine.opinions();
  };
  CHECK(run_with("1") == run_with("5"));
}

TEST_CASE("below-threshold cuts cross pairs but never a group from itself") {
  MicroConfig cfg;
  cfg.initial_opinions = {-0.5, -0.4, 0.4, 0.5};
  // Cross-group W1 = 0.9 <= sigma = 2, so the below mode cuts the cross
  // weight; the own-group weight must survive at exp(0) = 1.
  cfg.agents.assign(4, AgentParams{0.5, 2.0, 2.0,
                                   std::numeric_limits<double>::infinity()});
  MicroPartition part;
  part.group_of = {0, 0, 1, 1};
  part.n_groups = 2;
  part.kernel.gamma = 1.0;
  part.kernel.threshold = ThresholdMode::Below;
  part.kernel.sigma = 2.0;
  part.mode = WeightMode::Live;
  cfg.partitions.push_back(part);
  MicroEngine engine(cfg);
  const double f0 = engine.drift(0);
  CHECK(f0 == doctest::Approx(0.5 * 0.1 / 2.0).epsilon(1e-12));
}

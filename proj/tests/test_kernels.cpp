#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oplab/kernels.hpp"

using namespace oplab;

TEST_CASE("uniform kernel hard cutoff, inclusive boundary") {
  LocalKernelSpec k{.kind = LocalKernelKind::Uniform};
  CHECK(eval_local(k, 0.1, 0.5, 0.6) == 1.0);
  CHECK(eval_local(k, 0.1, 0.9, 0.6) == 0.0);
  CHECK(eval_local(k, 0.0, 0.6, 0.6) == 1.0);  // tie at eps interacts
}

TEST_CASE("triangular kernel returns eps - d, un-normalized") {
  LocalKernelSpec k{.kind = LocalKernelKind::Triangular};
  CHECK(eval_local(k, 0.0, 0.25, 0.6) == doctest::Approx(0.35));
  CHECK(eval_local(k, 0.0, 0.6, 0.6) == 0.0);  // boundary value is eps - eps
  CHECK(eval_local(k, 0.0, 0.61, 0.6) == 0.0);
}

TEST_CASE("exponential kernel direct evaluation") {
  LocalKernelSpec k{.kind = LocalKernelKind::Exponential, .gamma = 1.0, .alpha = 1.0};
  CHECK(eval_local(k, 0.0, 0.5, 0.6) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(eval_local(k, 0.0, 0.7, 0.6) == 0.0);
}

TEST_CASE("state-dependent kernel is open at neutral opinions") {
  LocalKernelSpec k{.kind = LocalKernelKind::StateExponential, .gamma = 1.0, .alpha = 2.0};
  CHECK(eval_local(k, 0.0, 0.3, 0.6) == 1.0);  // gamma(0) = 0
  // extreme holders resist
  CHECK(eval_local(k, 0.9, 0.6, 0.6) < 1.0);
}

TEST_CASE("local kernel symmetry facts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LocalKernelSpec uni{.kind = LocalKernelKind::Uniform};
  LocalKernelSpec tri{.kind = LocalKernelKind::Triangular};
  LocalKernelSpec expk{.kind = LocalKernelKind::Exponential, .gamma = 2.0, .alpha = 2.0};
  LocalKernelSpec state{.kind = LocalKernelKind::StateExponential, .gamma = 1.0, .alpha = 1.0};
  bool state_asymmetric = false;
  for (int it = 0; it < 200; ++it) {
    const double a = u(rng);
    const double b = u(rng);
    CHECK(eval_local(uni, a, b, 0.6) == eval_local(uni, b, a, 0.6));
    CHECK(eval_local(tri, a, b, 0.6) == eval_local(tri, b, a, 0.6));
    CHECK(eval_local(expk, a, b, 0.6) == eval_local(expk, b, a, 0.6));
    if (eval_local(state, a, b, 2.0) != eval_local(state, b, a, 2.0)) {
      state_asymmetric = true;
    }
  }
  CHECK(state_asymmetric);
}

TEST_CASE("every kernel kind vanishes outside the confidence ball") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto kind :
       {LocalKernelKind::Uniform, LocalKernelKind::Triangular,
        LocalKernelKind::Exponential, LocalKernelKind::StateExponential}) {
    LocalKernelSpec k{.kind = kind, .gamma = 1.5, .alpha = 2.0};
    for (int it = 0; it < 100; ++it) {
      const double a = u(rng);
      const double b = u(rng);
      const double eps = 0.3;
      if (std::abs(a - b) > eps) CHECK(eval_local(k, a, b, eps) == 0.0);
    }
  }
}

TEST_CASE("self-interaction stays above a positive floor") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LocalKernelSpec uni{.kind = LocalKernelKind::Uniform};
  LocalKernelSpec expk{.kind = LocalKernelKind::Exponential, .gamma = 3.0, .alpha = 2.0};
  LocalKernelSpec state{.kind = LocalKernelKind::StateExponential, .gamma = 3.0, .alpha = 2.0};
  for (int it = 0; it < 100; ++it) {
    const double x = u(rng);
    CHECK(eval_local(uni, x, x, 0.4) == 1.0);
    CHECK(eval_local(expk, x, x, 0.4) == 1.0);
    CHECK(eval_local(state, x, x, 0.4) == 1.0);
  }
}

TEST_CASE("population kernel examples") {
  PopulationKernelSpec k;
  k.gamma = 2.0;
  CHECK(eval_population(k, 0.0, 0.0, false) == 1.0);
  CHECK(eval_population(k, 0.5, 0.0, false) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  PopulationKernelSpec above = k;
  above.threshold = ThresholdMode::Above;
  above.sigma = 0.3;
  CHECK(eval_population(above, 0.5, 0.0, false) == 0.0);
  CHECK(eval_population(above, 0.3, 0.0, false) > 0.0);  // inclusive tie

  PopulationKernelSpec below = k;
  below.threshold = ThresholdMode::Below;
  below.sigma = 0.3;
  CHECK(eval_population(below, 0.1, 0.0, false) == 0.0);
  CHECK(eval_population(below, 0.5, 0.0, false) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("a group is never cut from itself") {
  PopulationKernelSpec below;
  below.gamma = 2.0;
  below.threshold = ThresholdMode::Below;
  below.sigma = 0.3;
  CHECK(eval_population(below, 0.0, 0.0, true) == 1.0);
}

TEST_CASE("population kernel monotone in w and in t") {
  PopulationKernelSpec k;
  k.gamma = 1.0;
  k.schedule = GammaSchedule{0.5};
  double prev = 2.0;
  for (double w = 0.0; w <= 2.0; w += 0.1) {
    const double v = eval_population(k, w, 0.0, false);
    CHECK(v <= prev);
    prev = v;
  }
  prev = 2.0;
  for (double t = 0.0; t <= 10.0; t += 0.5) {
    const double v = eval_population(k, 0.7, t, false);
    CHECK(v <= prev);
    CHECK(k.gamma_at(t) >= k.gamma);
    prev = v;
  }
}

TEST_CASE("kernel evaluations are pure") {
  LocalKernelSpec lk{.kind = LocalKernelKind::StateExponential, .gamma = 1.7, .alpha = 2.0};
  PopulationKernelSpec pk;
  pk.gamma = 1.3;
  pk.schedule = GammaSchedule{0.25};
  for (int it = 0; it < 50; ++it) {
    const double a = eval_local(lk, 0.31, -0.44, 0.9);
    const double b = eval_local(lk, 0.31, -0.44, 0.9);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    const double c = eval_population(pk, 0.37, 1.5, false);
    const double d = eval_population(pk, 0.37, 1.5, false);
    CHECK(std::memcmp(&c, &d, sizeof c) == 0);
  }
}

TEST_CASE("asymmetry mask selects ordered pairs") {
  PopulationKernelSpec k;
  k.mask = std::vector<GroupPair>{{0, 1}};  // source 0 -> target 1
  CHECK(k.applies(0, 1));
  CHECK(!k.applies(1, 0));
  CHECK(!k.applies(0, 0));
  PopulationKernelSpec open;
  CHECK(open.applies(1, 0));
}

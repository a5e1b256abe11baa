#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace oplab {

// Opinion space. All distributions in the library live on [-1, 1].
inline constexpr double kDomainLo = -1.0;
inline constexpr double kDomainHi = 1.0;

// Uniform mixture of Dirac masses at a sub-population's opinions.
// Samples are sorted at construction and must lie in [-1, 1].
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  // Fraction of samples <= y.
  double cdf(double y) const noexcept;
  double mean() const noexcept;

 private:
  std::vector<double> samples_;
};

// Piecewise-constant probability density on a uniform mesh over [-1, 1].
// Cell values are nonnegative and integrate to one (checked to 1e-12;
// mass drift is an error, never silently renormalized).
class GridDensity {
 public:
  explicit GridDensity(std::vector<double> values);

  // Builds from per-cell masses summing to one.
  static GridDensity from_masses(const std::vector<double>& masses);

  std::size_t n_cells() const noexcept { return values_.size(); }
  double dx() const noexcept { return 2.0 / static_cast<double>(n_cells()); }
  const std::vector<double>& values() const noexcept { return values_; }

  double edge(std::size_t e) const noexcept {
    return (2.0 * static_cast<double>(e)) / static_cast<double>(n_cells()) -
           1.0;
  }
  double cell_center(std::size_t c) const noexcept {
    return (2.0 * static_cast<double>(c) + 1.0) /
               static_cast<double>(n_cells()) -
           1.0;
  }

  double mass() const noexcept;
  double mean() const noexcept;
  // Piecewise-linear CDF.
  double cdf(double y) const noexcept;
  // Quantile function (inverse CDF), u in [0, 1].
  double quantile(double u) const noexcept;

 private:
  std::vector<double> values_;
};

// 1-Wasserstein distance, computed exactly from the piecewise CDFs.
double w1(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
double w1(const GridDensity& f, const GridDensity& g);
double w1(const EmpiricalDistribution& a, const GridDensity& g);
inline double w1(const GridDensity& g, const EmpiricalDistribution& a) {
  return w1(a, g);
}

namespace detail {
// Both spans sorted ascending. Dispatches to the equal-size pairing formula
// or the general CDF-breakpoint sum.
double w1_sorted(std::span<const double> a, std::span<const double> b);
double w1_sorted_equal(std::span<const double> a, std::span<const double> b);
double w1_sorted_cdf(std::span<const double> a, std::span<const double> b);
}  // namespace detail

// Declarative initial law for a sub-population.
struct InitialDistributionSpec {
  struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
  };
  struct TruncatedGaussian {
    double mean = 0.0;
    double stddev = 1.0;
    double lo = -1.0;
    double hi = 1.0;
  };
  struct Dirac {
    double x = 0.0;
  };
  struct Mixture {
    std::vector<std::pair<double, InitialDistributionSpec>> components;
  };

  std::variant<Uniform, TruncatedGaussian, Dirac, Mixture> kind =
      Uniform{};

  // Throws ConfigError naming the violated rule.
  void validate() const;
  double mean() const;
  // CDF of the law (exact; mixtures recurse).
  double cdf(double y) const;
};

// n independent draws, sorted. Deterministic for fixed (spec, n, seed);
// truncated Gaussians are drawn by rejection from the untruncated law.
EmpiricalDistribution sample_initial(const InitialDistributionSpec& spec,
                                     std::size_t n, std::uint64_t seed);

// Cell-averaged density of the law on an n_cells mesh.
GridDensity grid_from_spec(const InitialDistributionSpec& spec,
                           std::size_t n_cells);

}  // namespace oplab

#include "oplab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oplab/errors.hpp"

namespace oplab {

namespace {

constexpr double kMassTol = 1e-12;

// Exact integral of |linear ramp| running dl -> dr over a segment of the
// given length.
double abs_linear_integral(double dl, double dr, double len) {
  if ((dl >= 0.0 && dr >= 0.0) || (dl <= 0.0 && dr <= 0.0)) {
    return 0.5 * (std::abs(dl) + std::abs(dr)) * len;
  }
  // Sign change inside the segment: two triangles.
  return 0.5 * len * (dl * dl + dr * dr) / std::abs(dl - dr);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::acos(-1.0));
}

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw InvalidDistributionError("empirical distribution needs >= 1 sample");
  }
  std::sort(samples_.begin(), samples_.end());
  if (!(samples_.front() >= kDomainLo) || !(samples_.back() <= kDomainHi)) {
    throw InvalidDistributionError("empirical sample outside [-1, 1]");
  }
}

double EmpiricalDistribution::cdf(double y) const noexcept {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), y);
  return static_cast<double>(it - samples_.begin()) /
         static_cast<double>(samples_.size());
}

double EmpiricalDistribution::mean() const noexcept {
  double s = 0.0;
  for (double v : samples_) s += v;
  return s / static_cast<double>(samples_.size());
}

GridDensity::GridDensity(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw InvalidDistributionError("grid density is empty");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidDistributionError("grid density value negative or not finite");
    }
  }
  if (std::abs(mass() - 1.0) > kMassTol) {
    throw InvalidDistributionError("grid density mass drifted from 1 by " +
                                   std::to_string(mass() - 1.0));
  }
}

GridDensity GridDensity::from_masses(const std::vector<double>& masses) {
  std::vector<double> v(masses.size());
  const double scale = static_cast<double>(masses.size()) / 2.0;
  for (std::size_t c = 0; c < masses.size(); ++c) v[c] = masses[c] * scale;
  return GridDensity(std::move(v));
}

double GridDensity::mass() const noexcept {
  double m = 0.0;
  for (double v : values_) m += v;
  return m * dx();
}

double GridDensity::mean() const noexcept {
  double m = 0.0;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    m += cell_center(c) * values_[c];
  }
  return m * dx();
}

double GridDensity::cdf(double y) const noexcept {
  if (y <= kDomainLo) return 0.0;
  if (y >= kDomainHi) return mass();
  const double h = dx();
  auto idx = static_cast<std::size_t>((y - kDomainLo) / h);
  if (idx >= n_cells()) idx = n_cells() - 1;
  double acc = 0.0;
  for (std::size_t c = 0; c < idx; ++c) acc += values_[c];
  return acc * h + values_[idx] * (y - edge(idx));
}

double GridDensity::quantile(double u) const noexcept {
  u = std::clamp(u, 0.0, 1.0);
  const double h = dx();
  double acc = 0.0;
  for (std::size_t c = 0; c < n_cells(); ++c) {
    const double m = values_[c] * h;
    if (acc + m >= u && m > 0.0) {
      return edge(c) + (u - acc) / values_[c];
    }
    acc += m;
  }
  // u beyond accumulated mass (rounding): rightmost point with density.
  for (std::size_t c = n_cells(); c-- > 0;) {
    if (values_[c] > 0.0) return edge(c + 1);
  }
  return kDomainHi;
}

namespace detail {

double w1_sorted_equal(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double w1_sorted_cdf(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t ia = 0;
  std::size_t ib = 0;
  double total = 0.0;
  double prev = 0.0;
  bool first = true;
  while (ia < n || ib < m) {
    const double na = ia < n ? a[ia] : inf;
    const double nb = ib < m ? b[ib] : inf;
    const double x = std::min(na, nb);
    if (!first) {
      const double diff = static_cast<double>(ia) / static_cast<double>(n) -
                          static_cast<double>(ib) / static_cast<double>(m);
      total += std::abs(diff) * (x - prev);
    }
    while (ia < n && a[ia] == x) ++ia;
    while (ib < m && b[ib] == x) ++ib;
    prev = x;
    first = false;
  }
  return total;
}

double w1_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.size() == b.size()) return w1_sorted_equal(a, b);
  return w1_sorted_cdf(a, b);
}

}  // namespace detail

double w1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  return detail::w1_sorted(a.samples(), b.samples());
}

double w1(const GridDensity& f, const GridDensity& g) {
  if (f.n_cells() != g.n_cells()) {
    throw ShapeError("w1 on grid densities with different n_cells");
  }
  const double h = f.dx();
  double cf = 0.0;
  double cg = 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < f.n_cells(); ++c) {
    const double dl = cf - cg;
    cf += f.values()[c] * h;
    cg += g.values()[c] * h;
    const double dr = cf - cg;
    total += abs_linear_integral(dl, dr, h);
  }
  return total;
}

double w1(const EmpiricalDistribution& a, const GridDensity& g) {
  const auto& s = a.samples();
  const std::size_t n = s.size();
  const std::size_t nc = g.n_cells();
  const double h = g.dx();

  std::vector<double> fedge(nc + 1, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    fedge[c + 1] = fedge[c] + g.values()[c] * h;
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::size_t is = 0;
  std::size_t ie = 1;  // edge(0) == -1 is the walk's starting point
  double prev = kDomainLo;
  double total = 0.0;
  while (is < n && s[is] == kDomainLo) ++is;

  // Between consecutive breakpoints (grid edges and samples) the empirical
  // CDF is constant and the grid CDF is linear, so each segment integrates
  // in closed form.
  while (prev < kDomainHi) {
    const double next_edge = ie <= nc ? g.edge(ie) : inf;
    const double next_samp = is < n ? s[is] : inf;
    const double x = std::min(next_edge, next_samp);
    const std::size_t cell = ie - 1;
    const double fe = static_cast<double>(is) / static_cast<double>(n);
    const double fg_l =
        fedge[cell] + g.values()[cell] * (prev - g.edge(cell));
    const double fg_r = x == g.edge(cell + 1)
                            ? fedge[cell + 1]
                            : fedge[cell] + g.values()[cell] * (x - g.edge(cell));
    total += abs_linear_integral(fe - fg_l, fe - fg_r, x - prev);
    while (is < n && s[is] == x) ++is;
    while (ie <= nc && g.edge(ie) == x) ++ie;
    prev = x;
  }
  return total;
}

void InitialDistributionSpec::validate() const {
  struct Visitor {
    void operator()(const Uniform& u) const {
      if (!(u.lo < u.hi)) throw ConfigError("range-empty: uniform lo >= hi");
      check_bounds(u.lo, u.hi);
    }
    void operator()(const TruncatedGaussian& t) const {
      if (!(t.stddev > 0.0)) throw ConfigError("std-positive: stddev <= 0");
      if (!(t.lo < t.hi)) throw ConfigError("range-empty: gaussian lo >= hi");
      check_bounds(t.lo, t.hi);
    }
    void operator()(const Dirac& d) const { check_bounds(d.x, d.x); }
    void operator()(const Mixture& m) const {
      if (m.components.empty()) {
        throw ConfigError("mixture-empty: no components");
      }
      double sum = 0.0;
      for (const auto& [w, spec] : m.components) {
        if (!(w > 0.0)) throw ConfigError("mixture-weight-positive: w <= 0");
        sum += w;
        spec.validate();
      }
      if (std::abs(sum - 1.0) > kMassTol) {
        throw ConfigError("mixture-weights-sum: weights sum to " +
                          std::to_string(sum));
      }
    }
    static void check_bounds(double lo, double hi) {
      if (lo < kDomainLo || hi > kDomainHi) {
        throw ConfigError("bounds-outside-domain: endpoints beyond [-1, 1]");
      }
    }
  };
  std::visit(Visitor{}, kind);
}

double InitialDistributionSpec::mean() const {
  struct Visitor {
    double operator()(const Uniform& u) const { return 0.5 * (u.lo + u.hi); }
    double operator()(const TruncatedGaussian& t) const {
      const double a = (t.lo - t.mean) / t.stddev;
      const double b = (t.hi - t.mean) / t.stddev;
      const double z = normal_cdf(b) - normal_cdf(a);
      return t.mean + t.stddev * (normal_pdf(a) - normal_pdf(b)) / z;
    }
    double operator()(const Dirac& d) const { return d.x; }
    double operator()(const Mixture& m) const {
      double s = 0.0;
      for (const auto& [w, spec] : m.components) s += w * spec.mean();
      return s;
    }
  };
  return std::visit(Visitor{}, kind);
}

double InitialDistributionSpec::cdf(double y) const {
  struct Visitor {
    double y;
    double operator()(const Uniform& u) const {
      if (y <= u.lo) return 0.0;
      if (y >= u.hi) return 1.0;
      return (y - u.lo) / (u.hi - u.lo);
    }
    double operator()(const TruncatedGaussian& t) const {
      if (y <= t.lo) return 0.0;
      if (y >= t.hi) return 1.0;
      const double a = normal_cdf((t.lo - t.mean) / t.stddev);
      const double b = normal_cdf((t.hi - t.mean) / t.stddev);
      return (normal_cdf((y - t.mean) / t.stddev) - a) / (b - a);
    }
    double operator()(const Dirac& d) const { return y >= d.x ? 1.0 : 0.0; }
    double operator()(const Mixture& m) const {
      double s = 0.0;
      for (const auto& [w, spec] : m.components) s += w * spec.cdf(y);
      return s;
    }
  };
  return std::visit(Visitor{y}, kind);
}

namespace {

double draw_one(const InitialDistributionSpec& spec, std::mt19937_64& rng) {
  struct Visitor {
    std::mt19937_64& rng;
    double operator()(const InitialDistributionSpec::Uniform& u) const {
      return std::uniform_real_distribution<double>(u.lo, u.hi)(rng);
    }
    double operator()(
        const InitialDistributionSpec::TruncatedGaussian& t) const {
      std::normal_distribution<double> n(t.mean, t.stddev);
      for (;;) {
        const double v = n(rng);
        if (v >= t.lo && v <= t.hi) return v;
      }
    }
    double operator()(const InitialDistributionSpec::Dirac& d) const {
      return d.x;
    }
    double operator()(const InitialDistributionSpec::Mixture& m) const {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      double acc = 0.0;
      for (const auto& [w, spec] : m.components) {
        acc += w;
        if (u <= acc) return draw_one(spec, rng);
      }
      return draw_one(m.components.back().second, rng);
    }
  };
  return std::visit(Visitor{rng}, spec.kind);
}

void add_masses(const InitialDistributionSpec& spec, double weight,
                std::vector<double>& m) {
  const std::size_t n = m.size();
  if (const auto* d =
          std::get_if<InitialDistributionSpec::Dirac>(&spec.kind)) {
    auto idx = static_cast<std::size_t>((d->x - kDomainLo) *
                                        static_cast<double>(n) / 2.0);
    if (idx >= n) idx = n - 1;
    m[idx] += weight;
    return;
  }
  if (const auto* mix =
          std::get_if<InitialDistributionSpec::Mixture>(&spec.kind)) {
    for (const auto& [w, sub] : mix->components) add_masses(sub, weight * w, m);
    return;
  }
  double prev = spec.cdf(kDomainLo);
  for (std::size_t c = 0; c < n; ++c) {
    const double right = (2.0 * static_cast<double>(c + 1)) /
                             static_cast<double>(n) -
                         1.0;
    const double cur = spec.cdf(right);
    m[c] += weight * (cur - prev);
    prev = cur;
  }
}

}  // namespace

EmpiricalDistribution sample_initial(const InitialDistributionSpec& spec,
                                     std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ConfigError("sample-count-positive: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = draw_one(spec, rng);
  return EmpiricalDistribution(std::move(out));
}

GridDensity grid_from_spec(const InitialDistributionSpec& spec,
                           std::size_t n_cells) {
  spec.validate();
  if (n_cells == 0) throw ConfigError("n-cells-positive: n_cells must be >= 1");
  std::vector<double> m(n_cells, 0.0);
  add_masses(spec, 1.0, m);
  double total = 0.0;
  for (double v : m) total += v;
  for (double& v : m) v /= total;
  return GridDensity::from_masses(m);
}

}  // namespace oplab

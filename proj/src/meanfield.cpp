#include "oplab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oplab/errors.hpp"
#include "oplab/threading.hpp"

namespace oplab {

namespace {

constexpr double kPsiTol = 1e-14;
constexpr double kCflLimit = 0.9;

void validate_config(const MeanFieldConfig& cfg) {
  if (cfg.populations.empty()) throw ConfigError("mean-field config empty");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
  const std::size_t nc = cfg.populations.front().density.n_cells();
  double lsum = 0.0;
  for (const auto& p : cfg.populations) {
    if (p.density.n_cells() != nc) {
      throw ShapeError("populations must share one grid");
    }
    if (!(p.lambda > 0.0 && p.lambda < 1.0 + 1e-12)) {
      throw ConfigError("lambda outside (0, 1]");
    }
    if (!(p.eps > 0.0)) throw ConfigError("eps must be > 0");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ConfigError("alpha outside [0, 1]");
    lsum += p.lambda;
  }
  if (std::abs(lsum - 1.0) > 1e-12) {
    throw ConfigError("mass fractions must sum to 1");
  }
  const int P = static_cast<int>(cfg.populations.size());
  if (cfg.pop_kernel.threshold_gate) {
    const auto& g = *cfg.pop_kernel.threshold_gate;
    if (g.a < 0 || g.a >= P || g.b < 0 || g.b >= P) {
      throw ConfigError("threshold gate population out of range");
    }
  }
  if (cfg.pop_kernel.mask) {
    for (const auto& m : *cfg.pop_kernel.mask) {
      if (m.source < 0 || m.source >= P || m.target < 0 || m.target >= P) {
        throw ConfigError("mask population out of range");
      }
    }
  }
}

// Integrals of kappa and kappa * (y - x) against a grid density, midpoint
// quadrature on the density's own mesh.
void kernel_moments(const LocalKernelSpec& kernel, double eps, double x,
                    const GridDensity& rho, double& phi, double& jdiff) {
  phi = 0.0;
  jdiff = 0.0;
  const double h = rho.dx();
  const std::size_t nc = rho.n_cells();
  for (std::size_t c = 0; c < nc; ++c) {
    const double m = rho.values()[c] * h;
    if (m == 0.0) continue;
    const double y = rho.cell_center(c);
    const double kap = eval_local(kernel, x, y, eps);
    if (kap == 0.0) continue;
    phi += kap * m;
    jdiff += kap * (y - x) * m;
  }
}

}  // namespace

double VelocityField::max_abs() const {
  double m = 0.0;
  for (double v : edge_v) m = std::max(m, std::abs(v));
  return m;
}

double population_pair_weight(const PopulationKernelSpec& spec, int source,
                              int target, double w, double gate_w,
                              double sigma, double t) {
  if (!spec.applies(source, target)) return source == target ? 1.0 : 0.0;
  return eval_population_ex(spec, w, gate_w, sigma, t, source == target);
}

namespace {

std::vector<double> pairwise_w1_of(const std::vector<GridDensity>& rho) {
  const std::size_t P = rho.size();
  std::vector<double> out(P * P, 0.0);
  for (std::size_t a = 0; a < P; ++a) {
    for (std::size_t b = a + 1; b < P; ++b) {
      const double d = w1(rho[a], rho[b]);
      out[a * P + b] = d;
      out[b * P + a] = d;
    }
  }
  return out;
}

std::vector<double> weight_matrix_of(const MeanFieldConfig& cfg,
                                     const std::vector<GridDensity>& rho,
                                     double t) {
  const std::size_t P = rho.size();
  const auto dists = pairwise_w1_of(rho);
  const double gate = cfg.pop_kernel.threshold_gate
                          ? dists[static_cast<std::size_t>(
                                      cfg.pop_kernel.threshold_gate->a) *
                                      P +
                                  cfg.pop_kernel.threshold_gate->b]
                          : 0.0;
  std::vector<double> k(P * P, 0.0);
  for (std::size_t obs = 0; obs < P; ++obs) {
    for (std::size_t src = 0; src < P; ++src) {
      const double w = dists[obs * P + src];
      k[obs * P + src] = population_pair_weight(
          cfg.pop_kernel, static_cast<int>(src), static_cast<int>(obs), w,
          cfg.pop_kernel.threshold_gate ? gate : w,
          cfg.populations[obs].sigma, t);
    }
  }
  return k;
}

double velocity_from(const MeanFieldConfig& cfg,
                     const std::vector<GridDensity>& rho, int k,
                     const std::vector<double>& weights, double x,
                     bool* degenerate) {
  const std::size_t P = rho.size();
  const auto& pk = cfg.populations[k];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < P; ++r) {
    const double kw = weights[static_cast<std::size_t>(k) * P + r];
    if (kw == 0.0) continue;
    double phi;
    double jd;
    kernel_moments(pk.kernel, pk.eps, x, rho[r], phi, jd);
    num += cfg.populations[r].lambda * kw * jd;
    den += cfg.populations[r].lambda * kw * phi;
  }
  if (den <= kPsiTol) {
    if (degenerate) {
      *degenerate = true;
      return 0.0;
    }
    throw DegenerateDenominatorError(x);
  }
  if (degenerate) *degenerate = false;
  return pk.alpha * (num / den);
}

}  // namespace

double velocity(double x, const MeanFieldConfig& sys, int k, double t) {
  std::vector<GridDensity> rho;
  rho.reserve(sys.populations.size());
  for (const auto& p : sys.populations) rho.push_back(p.density);
  const auto weights = weight_matrix_of(sys, rho, t);
  return velocity_from(sys, rho, k, weights, x, nullptr);
}

GridDensity upwind_step(const GridDensity& rho, const VelocityField& field,
                        double dt) {
  const std::size_t nc = rho.n_cells();
  if (field.edge_v.size() != nc + 1) {
    throw ShapeError("velocity field does not match grid");
  }
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const double h = rho.dx();
  const double maxv = field.max_abs();
  if (dt * maxv / h > kCflLimit * (1.0 + 1e-12)) {
    throw CflError(dt, kCflLimit * h / maxv);
  }

  std::vector<double> flux(nc + 1, 0.0);
  for (std::size_t e = 1; e < nc; ++e) {
    const double v = field.edge_v[e];
    flux[e] = v > 0.0 ? v * rho.values()[e - 1] : v * rho.values()[e];
  }
  std::vector<double> next(nc);
  const double lam = dt / h;
  for (std::size_t c = 0; c < nc; ++c) {
    double v = rho.values()[c] - lam * (flux[c + 1] - flux[c]);
    // Round-off guard only; a real positivity violation still throws.
    if (v < 0.0 && v >= -1e-13) v = 0.0;
    next[c] = v;
  }
  return GridDensity(std::move(next));
}

MeanFieldEngine::MeanFieldEngine(MeanFieldConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  for (const auto& p : cfg_.populations) rho_.push_back(p.density);
}

std::vector<double> MeanFieldEngine::weight_matrix(double t) const {
  return weight_matrix_of(cfg_, rho_, t);
}

VelocityField MeanFieldEngine::field_for(
    int k, const std::vector<double>& weights) const {
  const std::size_t nc = rho_[k].n_cells();
  VelocityField f;
  f.edge_v.assign(nc + 1, 0.0);
  for (std::size_t e = 1; e < nc; ++e) {
    const double x = rho_[k].edge(e);
    // A denominator below tolerance means the weighted mass within reach of
    // this interface is unresolvable on the mesh; nothing moves there. The
    // free velocity() op keeps the strict error instead.
    bool degenerate = false;
    const double v = velocity_from(cfg_, rho_, k, weights, x, &degenerate);
    f.edge_v[e] = degenerate ? 0.0 : v;
  }
  return f;
}

VelocityField MeanFieldEngine::velocity_field(int k) const {
  return field_for(k, weight_matrix(time()));
}

void MeanFieldEngine::step() {
  const std::size_t P = rho_.size();
  double remaining = cfg_.dt;
  int guard = 0;
  while (remaining > 1e-15) {
    if (++guard > 100000) {
      throw ConfigError("mean-field sub-stepping failed to converge");
    }
    const double t = time() + (cfg_.dt - remaining);
    const auto weights = weight_matrix_of(cfg_, rho_, t);
    std::vector<VelocityField> fields(P);
    double maxv = 0.0;
    for (std::size_t k = 0; k < P; ++k) {
      fields[k] = field_for(static_cast<int>(k), weights);
      maxv = std::max(maxv, fields[k].max_abs());
    }
    // Positivity holds under lam * (v+ + v-) <= limit, which is implied by
    // twice the plain advective bound.
    const double h = rho_.front().dx();
    double sub = remaining;
    if (maxv > 0.0) sub = std::min(sub, kCflLimit * h / (2.0 * maxv));
    for (std::size_t k = 0; k < P; ++k) {
      rho_[k] = upwind_step(rho_[k], fields[k], sub);
      max_drift_ = std::max(max_drift_, std::abs(rho_[k].mass() - 1.0));
    }
    remaining -= sub;
  }
  ++step_;
}

std::vector<double> MeanFieldEngine::pairwise_w1() const {
  return pairwise_w1_of(rho_);
}

MeanFieldRunResult MeanFieldEngine::run(long n_steps, long save_every) {
  if (save_every < 1) save_every = 1;
  const int P = population_count();
  MeanFieldRunResult res;
  auto record = [&] {
    res.frame_steps.push_back(step_);
    res.frame_times.push_back(time());
    res.frames.push_back(rho_);
    const auto d = pairwise_w1();
    for (int a = 0; a < P; ++a) {
      for (int b = a + 1; b < P; ++b) {
        res.distances.push_back({step_, time(), 0, a, b,
                                 d[static_cast<std::size_t>(a) * P + b]});
      }
    }
  };
  record();
  for (long s = 1; s <= n_steps; ++s) {
    step();
    if (s % save_every == 0 || s == n_steps) record();
  }
  return res;
}

namespace {

std::vector<double> sample_particles(const GridDensity& rho, std::size_t n,
                                     bool stratified, std::mt19937_64& rng) {
  std::vector<double> out(n);
  if (stratified) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = rho.quantile((static_cast<double>(j) + 0.5) /
                            static_cast<double>(n));
    }
  } else {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) out[j] = rho.quantile(u(rng));
    std::sort(out.begin(), out.end());
  }
  return out;
}

using ParticleState = std::vector<std::vector<double>>;

std::vector<double> particle_weights(const MeanFieldConfig& cfg,
                                     const ParticleState& parts, double t) {
  const std::size_t P = parts.size();
  std::vector<double> dists(P * P, 0.0);
  ParticleState sorted = parts;
  for (auto& s : sorted) std::sort(s.begin(), s.end());
  for (std::size_t a = 0; a < P; ++a) {
    for (std::size_t b = a + 1; b < P; ++b) {
      const double d = detail::w1_sorted(sorted[a], sorted[b]);
      dists[a * P + b] = d;
      dists[b * P + a] = d;
    }
  }
  const double gate =
      cfg.pop_kernel.threshold_gate
          ? dists[static_cast<std::size_t>(cfg.pop_kernel.threshold_gate->a) *
                      P +
                  cfg.pop_kernel.threshold_gate->b]
          : 0.0;
  std::vector<double> weights(P * P, 0.0);
  for (std::size_t obs = 0; obs < P; ++obs) {
    for (std::size_t src = 0; src < P; ++src) {
      const double w = dists[obs * P + src];
      weights[obs * P + src] = population_pair_weight(
          cfg.pop_kernel, static_cast<int>(src), static_cast<int>(obs), w,
          cfg.pop_kernel.threshold_gate ? gate : w, cfg.populations[obs].sigma,
          t);
    }
  }
  return weights;
}

double particle_velocity(const MeanFieldConfig& cfg, const ParticleState& parts,
                         const std::vector<double>& weights, int k, double x) {
  const std::size_t P = parts.size();
  const auto& pk = cfg.populations[k];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < P; ++r) {
    const double kw = weights[static_cast<std::size_t>(k) * P + r];
    if (kw == 0.0) continue;
    double phi = 0.0;
    double jd = 0.0;
    for (double y : parts[r]) {
      const double kap = eval_local(pk.kernel, x, y, pk.eps);
      if (kap == 0.0) continue;
      phi += kap;
      jd += kap * (y - x);
    }
    const double inv = 1.0 / static_cast<double>(parts[r].size());
    num += cfg.populations[r].lambda * kw * jd * inv;
    den += cfg.populations[r].lambda * kw * phi * inv;
  }
  if (den <= kPsiTol) throw DegenerateDenominatorError(x);
  return pk.alpha * (num / den);
}

}  // namespace

OracleRunResult characteristics_oracle(const MeanFieldConfig& sys,
                                       long n_steps, long save_every,
                                       const OracleOptions& opt) {
  if (opt.n_particles < 2) throw ConfigError("oracle needs >= 2 particles");
  if (!(opt.dt > 0.0)) throw ConfigError("oracle dt must be > 0");
  if (save_every < 1) throw ConfigError("save_every must be >= 1");

  const std::size_t P = sys.populations.size();
  ParticleState parts(P);
  std::mt19937_64 rng(opt.seed);
  for (std::size_t k = 0; k < P; ++k) {
    const auto n_k = static_cast<std::size_t>(std::max<long long>(
        1, std::llround(sys.populations[k].lambda *
                        static_cast<double>(opt.n_particles))));
    parts[k] =
        sample_particles(sys.populations[k].density, n_k, opt.stratified, rng);
  }

  const int workers = worker_count();
  OracleRunResult res;
  auto record = [&](long s) {
    res.frame_steps.push_back(s);
    res.frame_times.push_back(static_cast<double>(s) * opt.dt);
    auto frame = parts;
    for (auto& f : frame) std::sort(f.begin(), f.end());
    res.frames.push_back(std::move(frame));
  };
  record(0);

  std::vector<double> weights;
  ParticleState k1(P), k2(P), k3(P), k4(P), xs(P);
  auto eval = [&](const ParticleState& state, ParticleState& out) {
    for (std::size_t k = 0; k < P; ++k) {
      out[k].resize(state[k].size());
      parallel_chunks(state[k].size(), workers,
                      [&](std::size_t lo, std::size_t hi) {
                        for (std::size_t j = lo; j < hi; ++j) {
                          out[k][j] = particle_velocity(
                              sys, state, weights, static_cast<int>(k),
                              state[k][j]);
                        }
                      });
    }
  };
  for (long s = 1; s <= n_steps; ++s) {
    weights = particle_weights(sys, parts, static_cast<double>(s - 1) * opt.dt);
    if (opt.method == StepMethod::Euler) {
      eval(parts, k1);
      for (std::size_t k = 0; k < P; ++k) {
        for (std::size_t j = 0; j < parts[k].size(); ++j) {
          parts[k][j] = std::clamp(parts[k][j] + opt.dt * k1[k][j], kDomainLo,
                                   kDomainHi);
        }
      }
    } else {
      eval(parts, k1);
      xs = parts;
      for (std::size_t k = 0; k < P; ++k)
        for (std::size_t j = 0; j < xs[k].size(); ++j)
          xs[k][j] = parts[k][j] + 0.5 * opt.dt * k1[k][j];
      eval(xs, k2);
      for (std::size_t k = 0; k < P; ++k)
        for (std::size_t j = 0; j < xs[k].size(); ++j)
          xs[k][j] = parts[k][j] + 0.5 * opt.dt * k2[k][j];
      eval(xs, k3);
      for (std::size_t k = 0; k < P; ++k)
        for (std::size_t j = 0; j < xs[k].size(); ++j)
          xs[k][j] = parts[k][j] + opt.dt * k3[k][j];
      eval(xs, k4);
      for (std::size_t k = 0; k < P; ++k) {
        for (std::size_t j = 0; j < parts[k].size(); ++j) {
          const double incr =
              (k1[k][j] + 2.0 * k2[k][j] + 2.0 * k3[k][j] + k4[k][j]) / 6.0;
          parts[k][j] = std::clamp(parts[k][j] + opt.dt * incr, kDomainLo,
                                   kDomainHi);
        }
      }
    }
    if (s % save_every == 0 || s == n_steps) record(s);
  }
  return res;
}

}  // namespace oplab

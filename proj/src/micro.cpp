#include "oplab/micro.hpp"

#include <algorithm>
#include <cmath>

#include "oplab/distributions.hpp"
#include "oplab/errors.hpp"
#include "oplab/threading.hpp"

namespace oplab {

namespace {

void validate_config(const MicroConfig& cfg) {
  const std::size_t n = cfg.initial_opinions.size();
  if (n == 0) throw ConfigError("micro config has no agents");
  if (cfg.agents.size() != n) {
    throw ShapeError("agents and initial_opinions size mismatch");
  }
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = cfg.agents[i];
    const double x = cfg.initial_opinions[i];
    if (!(x >= kDomainLo && x <= kDomainHi)) {
      throw ConfigError("initial opinion outside [-1, 1]");
    }
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) {
      throw ConfigError("alpha outside [0, 1]");
    }
    if (!(a.eps > 0.0)) throw ConfigError("eps must be > 0");
    if (!(a.scope >= a.eps)) {
      throw ConfigError("scope must be >= eps when bounded");
    }
  }
  if (cfg.partitions.empty()) {
    throw ConfigError("micro config needs at least one partition");
  }
  double wsum = 0.0;
  for (const auto& p : cfg.partitions) {
    if (p.group_of.size() != n) {
      throw ShapeError("partition group assignment size mismatch");
    }
    if (p.n_groups <= 0) throw ConfigError("partition has no groups");
    for (int g : p.group_of) {
      if (g < 0 || g >= p.n_groups) throw ConfigError("group index out of range");
    }
    wsum += p.weight;
    if (!(p.weight >= 0.0)) throw ConfigError("partition weight negative");
    if (p.kernel.threshold_gate) {
      const auto& g = *p.kernel.threshold_gate;
      if (g.a < 0 || g.a >= p.n_groups || g.b < 0 || g.b >= p.n_groups) {
        throw ConfigError("threshold gate group out of range");
      }
    }
    if (p.kernel.mask) {
      for (const auto& m : *p.kernel.mask) {
        if (m.source < 0 || m.source >= p.n_groups || m.target < 0 ||
            m.target >= p.n_groups) {
          throw ConfigError("mask group out of range");
        }
      }
    }
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw ConfigError("partition weights must sum to 1");
  }
}

// Members of group g with opinion in [lo, hi], as a sorted span.
std::span<const double> window(const std::vector<double>& sorted_group,
                               double lo, double hi) {
  const auto b = std::lower_bound(sorted_group.begin(), sorted_group.end(), lo);
  const auto e = std::upper_bound(b, sorted_group.end(), hi);
  return {sorted_group.data() + (b - sorted_group.begin()),
          static_cast<std::size_t>(e - b)};
}

}  // namespace

MicroEngine::MicroEngine(MicroConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  x_ = cfg_.initial_opinions;
  const std::size_t n = x_.size();
  workers_ = worker_count();

  scoped_slot_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(cfg_.agents[i].scope)) scoped_slot_[i] = n_scoped_++;
  }

  parts_.resize(cfg_.partitions.size());
  for (std::size_t r = 0; r < cfg_.partitions.size(); ++r) {
    const auto& p = cfg_.partitions[r];
    auto& st = parts_[r];
    st.members.resize(p.n_groups);
    for (std::size_t i = 0; i < n; ++i) {
      st.members[p.group_of[i]].push_back(static_cast<int>(i));
    }
    for (int g = 0; g < p.n_groups; ++g) {
      if (st.members[g].empty()) {
        throw ConfigError("partition " + std::to_string(r) + " group " +
                          std::to_string(g) + " is empty");
      }
    }
    st.sorted.resize(p.n_groups);
    st.w1.assign(static_cast<std::size_t>(p.n_groups) * p.n_groups, 0.0);
    st.expval = st.w1;
    if (n_scoped_ > 0) {
      st.scoped_w1.assign(static_cast<std::size_t>(n_scoped_) * p.n_groups, 0.0);
      st.scoped_expval = st.scoped_w1;
      st.scoped_gate.assign(n_scoped_, 0.0);
    }
    rebuild_distances(static_cast<int>(r));
    rebuild_expvals(static_cast<int>(r));
  }
}

void MicroEngine::rebuild_distances(int r) {
  const auto& p = cfg_.partitions[r];
  auto& st = parts_[r];
  const int P = p.n_groups;

  for (int g = 0; g < P; ++g) {
    auto& dst = st.sorted[g];
    dst.resize(st.members[g].size());
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = x_[st.members[g][k]];
    std::sort(dst.begin(), dst.end());
  }
  for (int a = 0; a < P; ++a) {
    st.w1[static_cast<std::size_t>(a) * P + a] = 0.0;
    for (int b = a + 1; b < P; ++b) {
      const double d = detail::w1_sorted(st.sorted[a], st.sorted[b]);
      st.w1[static_cast<std::size_t>(a) * P + b] = d;
      st.w1[static_cast<std::size_t>(b) * P + a] = d;
    }
  }
  st.gate_w = p.kernel.threshold_gate
                  ? st.w1[static_cast<std::size_t>(p.kernel.threshold_gate->a) *
                              P +
                          p.kernel.threshold_gate->b]
                  : 0.0;

  if (n_scoped_ == 0) return;
  const std::size_t n = x_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int slot = scoped_slot_[i];
    if (slot < 0) continue;
    const double s = cfg_.agents[i].scope;
    const double lo = x_[i] - s;
    const double hi = x_[i] + s;
    const int own = p.group_of[i];
    const auto own_win = window(st.sorted[own], lo, hi);
    for (int q = 0; q < P; ++q) {
      const auto q_win = window(st.sorted[q], lo, hi);
      const std::size_t at = static_cast<std::size_t>(slot) * P + q;
      if (q_win.empty()) {
        // Unobservable group: zero weight toward it.
        st.scoped_w1[at] = std::numeric_limits<double>::infinity();
      } else {
        st.scoped_w1[at] = detail::w1_sorted(own_win, q_win);
      }
    }
    if (p.kernel.threshold_gate) {
      const auto ga = window(st.sorted[p.kernel.threshold_gate->a], lo, hi);
      const auto gb = window(st.sorted[p.kernel.threshold_gate->b], lo, hi);
      st.scoped_gate[slot] = (ga.empty() || gb.empty())
                                 ? std::numeric_limits<double>::infinity()
                                 : detail::w1_sorted(ga, gb);
    }
  }
}

void MicroEngine::rebuild_expvals(int r) {
  const auto& p = cfg_.partitions[r];
  auto& st = parts_[r];
  const double g = p.kernel.gamma_at(time());
  for (std::size_t k = 0; k < st.w1.size(); ++k) {
    st.expval[k] = std::exp(-g * st.w1[k]);
  }
  for (std::size_t k = 0; k < st.scoped_w1.size(); ++k) {
    st.scoped_expval[k] =
        std::isinf(st.scoped_w1[k]) ? 0.0 : std::exp(-g * st.scoped_w1[k]);
  }
}

double MicroEngine::population_weight(int r, int i, int j) const {
  const auto& p = cfg_.partitions[r];
  const auto& st = parts_[r];
  const int k = p.group_of[i];
  const int q = p.group_of[j];
  if (!p.kernel.applies(q, k)) return k == q ? 1.0 : 0.0;

  double ev;
  double gate;
  const int slot = scoped_slot_[i];
  if (slot >= 0) {
    const std::size_t at = static_cast<std::size_t>(slot) * p.n_groups + q;
    ev = st.scoped_expval[at];
    gate = p.kernel.threshold_gate ? st.scoped_gate[slot] : st.scoped_w1[at];
  } else {
    const std::size_t at = static_cast<std::size_t>(k) * p.n_groups + q;
    ev = st.expval[at];
    gate = p.kernel.threshold_gate ? st.gate_w : st.w1[at];
  }
  if (k != q) {
    const double sigma = cfg_.agents[i].sigma;
    if (p.kernel.threshold == ThresholdMode::Above && gate > sigma) return 0.0;
    if (p.kernel.threshold == ThresholdMode::Below && gate <= sigma) return 0.0;
  }
  return ev;
}

double MicroEngine::drift_at(const std::vector<double>& x, int i) const {
  const auto& ai = cfg_.agents[i];
  if (ai.alpha == 0.0) return 0.0;
  const double xi = x[i];
  const std::size_t n = x.size();
  const std::size_t n_parts = cfg_.partitions.size();

  double z = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double qw = 0.0;
    for (std::size_t r = 0; r < n_parts; ++r) {
      qw += cfg_.partitions[r].weight *
            population_weight(static_cast<int>(r), i, static_cast<int>(j));
    }
    if (qw == 0.0) continue;
    const double kap = eval_local(cfg_.local_kernel, xi, x[j], ai.eps);
    if (kap == 0.0) continue;
    const double w = qw * kap;
    z += w;
    acc += w * (x[j] - xi);
  }
  if (!(z > 0.0)) throw DegenerateNeighborhoodError(i, step_);
  return ai.alpha * (acc / z);
}

double MicroEngine::drift(int i) const { return drift_at(x_, i); }

void MicroEngine::compute_drifts(const std::vector<double>& x,
                                 std::vector<double>& out) const {
  out.resize(x.size());
  parallel_chunks(x.size(), workers_, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = drift_at(x, static_cast<int>(i));
    }
  });
}

void MicroEngine::step() {
  for (std::size_t r = 0; r < cfg_.partitions.size(); ++r) {
    const auto& p = cfg_.partitions[r];
    if (p.mode == WeightMode::Live) rebuild_distances(static_cast<int>(r));
    if (p.mode == WeightMode::Live || p.kernel.schedule) {
      rebuild_expvals(static_cast<int>(r));
    }
  }

  const double dt = cfg_.dt;
  const std::size_t n = x_.size();
  if (cfg_.method == StepMethod::Euler) {
    compute_drifts(x_, k1_);
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg_.agents[i].alpha == 0.0) continue;
      x_[i] = std::clamp(x_[i] + dt * k1_[i], kDomainLo, kDomainHi);
    }
  } else {
    // Classic RK4 on the frozen per-step weights; single clamp at step end.
    compute_drifts(x_, k1_);
    xs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) xs_[i] = x_[i] + 0.5 * dt * k1_[i];
    compute_drifts(xs_, k2_);
    for (std::size_t i = 0; i < n; ++i) xs_[i] = x_[i] + 0.5 * dt * k2_[i];
    compute_drifts(xs_, k3_);
    for (std::size_t i = 0; i < n; ++i) xs_[i] = x_[i] + dt * k3_[i];
    compute_drifts(xs_, k4_);
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg_.agents[i].alpha == 0.0) continue;
      const double incr =
          (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) / 6.0;
      x_[i] = std::clamp(x_[i] + dt * incr, kDomainLo, kDomainHi);
    }
  }
  ++step_;
}

std::vector<double> MicroEngine::group_w1(int partition) const {
  const auto& p = cfg_.partitions[partition];
  const auto& st = parts_[partition];
  const int P = p.n_groups;
  std::vector<std::vector<double>> sorted(P);
  for (int g = 0; g < P; ++g) {
    sorted[g].resize(st.members[g].size());
    for (std::size_t k = 0; k < sorted[g].size(); ++k) {
      sorted[g][k] = x_[st.members[g][k]];
    }
    std::sort(sorted[g].begin(), sorted[g].end());
  }
  std::vector<double> out(static_cast<std::size_t>(P) * P, 0.0);
  for (int a = 0; a < P; ++a) {
    for (int b = a + 1; b < P; ++b) {
      const double d = detail::w1_sorted(sorted[a], sorted[b]);
      out[static_cast<std::size_t>(a) * P + b] = d;
      out[static_cast<std::size_t>(b) * P + a] = d;
    }
  }
  return out;
}

MicroRunResult MicroEngine::run(long n_steps, long save_every) {
  if (n_steps < 0) throw ConfigError("n_steps must be >= 0");
  if (save_every < 1) save_every = 1;
  MicroRunResult res;
  auto record = [&] {
    res.frame_steps.push_back(step_);
    res.frame_times.push_back(time());
    res.frames.push_back(x_);
    for (std::size_t r = 0; r < cfg_.partitions.size(); ++r) {
      const auto d = group_w1(static_cast<int>(r));
      const int P = cfg_.partitions[r].n_groups;
      for (int a = 0; a < P; ++a) {
        for (int b = a + 1; b < P; ++b) {
          res.distances.push_back({step_, time(), static_cast<int>(r), a, b,
                                   d[static_cast<std::size_t>(a) * P + b]});
        }
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

namespace detail {

double drift_with_weights(const std::vector<double>& x,
                          const std::vector<AgentParams>& agents, int i,
                          const std::function<double(int, int)>& weight,
                          long step) {
  const auto& ai = agents[i];
  if (ai.alpha == 0.0) return 0.0;
  double z = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = weight(i, static_cast<int>(j));
    if (w == 0.0) continue;
    z += w;
    acc += w * (x[j] - x[i]);
  }
  if (!(z > 0.0)) throw DegenerateNeighborhoodError(i, step);
  return ai.alpha * (acc / z);
}

}  // namespace detail

}  // namespace oplab

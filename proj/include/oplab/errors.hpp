#pragma once

#include <stdexcept>
#include <string>

namespace oplab {

// A distribution or density violates its construction contract
// (empty sample set, negative density, mass drift, ...).
class InvalidDistributionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched array/grid shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration detected outside full scenario validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero total interaction mass in a drift evaluation. Should be unreachable
// under valid configurations; never silently mapped to a zero drift.
class DegenerateNeighborhoodError : public std::runtime_error {
 public:
  DegenerateNeighborhoodError(int agent, long step)
      : std::runtime_error("zero interaction mass for agent " +
                           std::to_string(agent) + " at step " +
                           std::to_string(step)),
        agent(agent),
        step(step) {}
  int agent;
  long step;
};

// Velocity denominator below tolerance in the mean-field model.
class DegenerateDenominatorError : public std::runtime_error {
 public:
  explicit DegenerateDenominatorError(double x)
      : std::runtime_error("degenerate velocity denominator at x=" +
                           std::to_string(x)),
        x(x) {}
  double x;
};

// Transport step larger than the advective stability bound.
class CflError : public std::runtime_error {
 public:
  CflError(double dt, double bound)
      : std::runtime_error("CFL violation: dt=" + std::to_string(dt) +
                           " exceeds bound " + std::to_string(bound)),
        dt(dt),
        dt_bound(bound) {}
  double dt;
  double dt_bound;
};

}  // namespace oplab

#pragma once
// Piecewise-constant control on a uniform time grid.

#include <cmath>
#include <cstddef>
#include <vector>

#include "envgame/errors.hpp"

namespace envgame {

// Zero-order-hold control over [0, horizon]: one value per grid cell of
// width dt, evaluated left-continuously at cell boundaries. The horizon must
// be an exact multiple of dt.
class ControlSignal {
 public:
  ControlSignal(double horizon, double dt) : horizon_(horizon), dt_(dt) {
    if (!(horizon > 0.0)) throw ConfigError("control.horizon: must be > 0");
    if (!(dt > 0.0)) throw ConfigError("control.dt: must be > 0");
    const double cells = horizon / dt;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * cells || rounded < 1.0)
      throw ConfigError("control.dt: horizon must be an exact multiple of the grid spacing");
    values_.assign(static_cast<std::size_t>(rounded), 0.0);
  }

  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  std::size_t cells() const { return values_.size(); }
  double cell_start(std::size_t i) const { return dt_ * static_cast<double>(i); }
  double cell_end(std::size_t i) const { return dt_ * static_cast<double>(i + 1); }

  double value(std::size_t i) const { return values_[i]; }
  void set_value(std::size_t i, double v) { values_[i] = v; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // ZOH evaluation: value of the cell containing t, left-continuous at cell
  // boundaries (u(t_i) is the value of the cell ending at t_i).
  double at(double t) const {
    if (t <= 0.0) return values_.front();
    const double idx = std::ceil(t / dt_) - 1.0;
    const auto i = static_cast<std::size_t>(
        std::min(std::max(idx, 0.0), static_cast<double>(values_.size() - 1)));
    return values_[i];
  }

 private:
  double horizon_;
  double dt_;
  std::vector<double> values_;
};

inline bool operator==(const ControlSignal& a, const ControlSignal& b) {
  return a.horizon() == b.horizon() && a.dt() == b.dt() && a.values() == b.values();
}

}  // namespace envgame

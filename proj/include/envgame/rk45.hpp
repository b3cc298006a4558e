#pragma once
// Adaptive Dormand-Prince 5(4) integration with fourth-order dense output.
// Used forward for state trajectories, backward for costate trajectories,
// and for quadrature of running costs via an augmented coordinate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "envgame/state.hpp"

namespace envgame {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  double max_step = 0.0;  // <= 0: no cap beyond the span of the call
  double initial_step = 1e-3;

  void validate() const {
    if (!(rel_tol > 0.0)) throw ConfigError("integrator.rel_tol: must be > 0");
    if (!(abs_tol > 0.0)) throw ConfigError("integrator.abs_tol: must be > 0");
    if (!(initial_step > 0.0)) throw ConfigError("integrator.initial_step: must be > 0");
  }
};

// Step-size underflow or a state coordinate escaping the unit box by more
// than the tolerated band. Carries the failing time and state.
struct IntegrationError : std::runtime_error {
  double t;
  StateVec y;

  IntegrationError(const std::string& what, double t_fail, const StateVec& y_fail)
      : std::runtime_error(what + " at t=" + format(t_fail) + ", state=" + format_vec(y_fail)),
        t(t_fail),
        y(y_fail) {}

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
  }
  static std::string format_vec(const StateVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += format(v[i]);
    }
    return s + ")";
  }
};

// Dense trajectory of accepted steps. Evaluation anywhere in the covered
// interval uses the per-step quartic interpolant; node values are reproduced
// exactly at theta = 0 and theta = 1.
class Trajectory {
 public:
  struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;  // signed
    StateVec y0, rc2, rc3, rc4, rc5;
  };

  Trajectory() = default;
  Trajectory(double t0, StateVec y0, bool backward)
      : t_start_(t0), t_end_(t0), y_start_(y0), y_end_(std::move(y0)), backward_(backward) {}

  bool backward() const { return backward_; }
  double start_time() const { return t_start_; }
  double end_time() const { return t_end_; }
  const StateVec& start_state() const { return y_start_; }
  const StateVec& end_state() const { return y_end_; }
  std::size_t step_count() const { return steps_.size(); }
  const std::vector<DenseStep>& steps() const { return steps_; }
  std::size_t dim() const { return y_start_.size(); }

  // Covered time interval as (lo, hi) regardless of direction.
  std::pair<double, double> span() const {
    return backward_ ? std::make_pair(t_end_, t_start_) : std::make_pair(t_start_, t_end_);
  }

  void push_step(DenseStep step, const StateVec& y_new, double t_new) {
    steps_.push_back(std::move(step));
    y_end_ = y_new;
    t_end_ = t_new;
  }

  // Appends a continuation that starts exactly where this trajectory ends.
  void extend(Trajectory&& tail) {
    if (tail.backward_ != backward_) throw std::logic_error("trajectory extend: direction mismatch");
    if (std::abs(tail.t_start_ - t_end_) > 1e-12 * (1.0 + std::abs(t_end_)))
      throw std::logic_error("trajectory extend: time gap");
    steps_.insert(steps_.end(), std::make_move_iterator(tail.steps_.begin()),
                  std::make_move_iterator(tail.steps_.end()));
    t_end_ = tail.t_end_;
    y_end_ = tail.y_end_;
  }

  StateVec at(double t) const {
    if (steps_.empty()) {
      if (std::abs(t - t_start_) <= absolute_slack()) return y_end_;
      throw std::out_of_range("trajectory evaluation outside covered interval");
    }
    const auto [lo, hi] = span();
    if (t < lo - absolute_slack() || t > hi + absolute_slack())
      throw std::out_of_range("trajectory evaluation outside covered interval");
    const DenseStep& s = locate(t);
    double theta = (t - s.t0) / s.h;
    theta = std::clamp(theta, 0.0, 1.0);
    const double omt = 1.0 - theta;
    StateVec out = s.y0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += theta * (s.rc2[i] + omt * (s.rc3[i] + theta * (s.rc4[i] + omt * s.rc5[i])));
    }
    return out;
  }

 private:
  double absolute_slack() const {
    const auto [lo, hi] = span();
    return 1e-9 * (1.0 + (hi - lo));
  }

  const DenseStep& locate(double t) const {
    if (!backward_) {
      // last step whose start time is <= t
      auto it = std::partition_point(steps_.begin(), steps_.end(),
                                     [t](const DenseStep& s) { return s.t0 <= t; });
      if (it != steps_.begin()) --it;
      return *it;
    }
    auto it = std::partition_point(steps_.begin(), steps_.end(),
                                   [t](const DenseStep& s) { return s.t0 >= t; });
    if (it != steps_.begin()) --it;
    return *it;
  }

  std::vector<DenseStep> steps_;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  StateVec y_start_, y_end_;
  bool backward_ = false;
};

namespace rk45_detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Fifth-order minus embedded fourth-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

inline constexpr double kSafety = 0.9;
inline constexpr double kMinShrink = 0.2;
inline constexpr double kMaxGrow = 5.0;
inline constexpr double kUnderflowFraction = 1e-12;
inline constexpr double kBoxBand = 1e-6;

}  // namespace rk45_detail

// Integrates dy/dt = field(t, y) from t0 to t1 (either direction) under the
// embedded-pair error test. The leading box_dims coordinates are constrained
// to the unit box: leaving it by more than 1e-6 aborts, smaller excursions
// are clamped. h_hint, when given, seeds the first step and carries the
// suggestion out, so piecewise integrations do not re-ramp the step size.
template <typename Field>
Trajectory integrate(Field&& field, const StateVec& y0, double t0, double t1,
                     const IntegratorConfig& cfg, std::size_t box_dims = 0,
                     double* h_hint = nullptr) {
  using namespace rk45_detail;
  cfg.validate();
  const double span = t1 - t0;
  if (span == 0.0) return Trajectory(t0, y0, false);
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double span_abs = std::abs(span);
  const double hmax = cfg.max_step > 0.0 ? cfg.max_step : span_abs;
  const double hmin = kUnderflowFraction * span_abs;
  const std::size_t dim = y0.size();

  Trajectory traj(t0, y0, dir < 0.0);
  double t = t0;
  StateVec y = y0;
  double h = std::min({(h_hint && *h_hint > 0.0) ? *h_hint : cfg.initial_step, hmax, span_abs});
  StateVec k1 = field(t, y);

  auto scaled_err = [&](const StateVec& err, const StateVec& ya, const StateVec& yb) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double q = err[i] / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(dim));
  };

  bool done = false;
  while (!done) {
    double h_step = h;
    if (std::abs(t1 - t) <= h_step) {
      h_step = std::abs(t1 - t);
      done = true;
    }
    const double hs = dir * h_step;

    StateVec k2 = field(t + hs * a21, sum_scaled(y, hs * a21, k1));
    StateVec yt = y;
    add_scaled(yt, hs * a31, k1);
    add_scaled(yt, hs * a32, k2);
    StateVec k3 = field(t + hs * (3.0 / 10), yt);
    yt = y;
    add_scaled(yt, hs * a41, k1);
    add_scaled(yt, hs * a42, k2);
    add_scaled(yt, hs * a43, k3);
    StateVec k4 = field(t + hs * (4.0 / 5), yt);
    yt = y;
    add_scaled(yt, hs * a51, k1);
    add_scaled(yt, hs * a52, k2);
    add_scaled(yt, hs * a53, k3);
    add_scaled(yt, hs * a54, k4);
    StateVec k5 = field(t + hs * (8.0 / 9), yt);
    yt = y;
    add_scaled(yt, hs * a61, k1);
    add_scaled(yt, hs * a62, k2);
    add_scaled(yt, hs * a63, k3);
    add_scaled(yt, hs * a64, k4);
    add_scaled(yt, hs * a65, k5);
    const double t_new = done ? t1 : t + hs;
    StateVec k6 = field(t_new, yt);

    StateVec y_new = y;
    add_scaled(y_new, hs * b1, k1);
    add_scaled(y_new, hs * b3, k3);
    add_scaled(y_new, hs * b4, k4);
    add_scaled(y_new, hs * b5, k5);
    add_scaled(y_new, hs * b6, k6);
    StateVec k7 = field(t_new, y_new);

    StateVec err(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    const double err_norm = scaled_err(err, y, y_new);

    if (err_norm <= 1.0) {
      // Accept. Enforce the unit box on the leading coordinates.
      for (std::size_t i = 0; i < box_dims && i < dim; ++i) {
        if (y_new[i] < -kBoxBand || y_new[i] > 1.0 + kBoxBand)
          throw IntegrationError("state left the unit box", t_new, y_new);
        y_new[i] = std::clamp(y_new[i], 0.0, 1.0);
      }

      Trajectory::DenseStep step;
      step.t0 = t;
      step.h = hs;
      step.y0 = y;
      StateVec ydiff(dim), bspl(dim), rc4(dim), rc5(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        ydiff[i] = y_new[i] - y[i];
        bspl[i] = hs * k1[i] - ydiff[i];
        rc4[i] = ydiff[i] - hs * k7[i] - bspl[i];
        rc5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                       d7 * k7[i]);
      }
      step.rc2 = ydiff;
      step.rc3 = bspl;
      step.rc4 = rc4;
      step.rc5 = rc5;
      traj.push_step(std::move(step), y_new, t_new);

      t = t_new;
      y = y_new;
      k1 = std::move(k7);

      const double grow = err_norm == 0.0 ? kMaxGrow
                                          : std::min(kMaxGrow, std::max(kMinShrink,
                                                  kSafety * std::pow(err_norm, -0.2)));
      h = std::min(h_step * grow, hmax);
    } else {
      done = false;
      const double shrink =
          std::max(kMinShrink, std::min(1.0, kSafety * std::pow(err_norm, -0.2)));
      h = h_step * shrink;
      if (h < hmin) throw IntegrationError("step size underflow", t, y);
    }
  }

  if (h_hint) *h_hint = h;
  return traj;
}

// Integral of a scalar function of time over [t0, t1], computed by the same
// adaptive method on the augmented coordinate z' = f(t).
template <typename Fn>
double quadrature_running_cost(Fn&& integrand, double t0, double t1,
                               const IntegratorConfig& cfg) {
  auto field = [&](double t, const StateVec&) { return StateVec{integrand(t)}; };
  const Trajectory traj = integrate(field, StateVec{0.0}, t0, t1, cfg);
  return traj.end_state()[0];
}

}  // namespace envgame

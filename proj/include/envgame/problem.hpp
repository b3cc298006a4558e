#pragma once
// The three optimal-control formulations: problem data, Hamiltonians,
// analytic costate fields, pointwise Hamiltonian maximizers, and the
// forward/backward single-shooting passes they share.
//
// Incentive:   max J = int n^2 dt,            u in [-u_max, u_max]
// Propaganda:  max J = 1/2 int C1 n^2 - C2 u^2 dt,   u unconstrained
// Awareness:   same objective,                u in [0, inf)

#include <cmath>
#include <optional>
#include <string>

#include "envgame/control.hpp"
#include "envgame/fields.hpp"
#include "envgame/rk45.hpp"

namespace envgame {

enum class ProblemKind { Incentive, Propaganda, Awareness };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Incentive: return "incentive";
    case ProblemKind::Propaganda: return "propaganda";
    case ProblemKind::Awareness: return "awareness";
  }
  return "?";
}

// Hard cap on the awareness control returned by the maximizer; costate
// blow-ups would otherwise produce non-physical learning rates.
inline constexpr double kAwarenessControlCap = 1e3;

struct ProblemSpec {
  ProblemKind kind;
  GamePayoffs payoffs;
  SystemState initial;
  double horizon = 0.0;
  std::optional<double> u_max;  // incentive only
  std::optional<double> c1;     // propaganda/awareness
  std::optional<double> c2;     // propaganda/awareness

  std::size_t state_dim() const { return kind == ProblemKind::Incentive ? 2 : 3; }

  void validate() const {
    if (!(horizon > 0.0)) throw ConfigError("problem.tf: must be > 0");
    if (kind == ProblemKind::Incentive) {
      if (!u_max) throw ConfigError("problem.u_max: required for the incentive problem");
      if (!(*u_max > 0.0)) throw ConfigError("problem.u_max: must be > 0");
      if (c1 || c2) throw ConfigError("problem.c1/c2: not used by the incentive problem");
      if (initial.o) throw ConfigError("problem.o0: incentive state is two-dimensional");
    } else {
      if (u_max) throw ConfigError("problem.u_max: only the incentive problem is bounded");
      if (!c1 || !(*c1 > 0.0)) throw ConfigError("problem.c1: must be present and > 0");
      if (!c2 || !(*c2 > 0.0)) throw ConfigError("problem.c2: must be present and > 0");
      if (!initial.o) throw ConfigError("problem.o0: opinion problems need a three-dimensional state");
      if (!payoffs.has_gamma()) throw ConfigError("payoffs.gamma: required by opinion dynamics");
    }
    if (!initial.interior())
      throw ConfigError("problem.initial: optimization requires an interior initial state");
  }

  bool admissible(double u) const {
    switch (kind) {
      case ProblemKind::Incentive: return std::abs(u) <= *u_max + 1e-12;
      case ProblemKind::Propaganda: return true;
      case ProblemKind::Awareness: return u >= -1e-12;
    }
    return false;
  }
};

// State derivative under the formulation's controlled dynamics.
inline StateVec controlled_field(const ProblemSpec& spec, const SystemState& s, double u) {
  switch (spec.kind) {
    case ProblemKind::Incentive: return field_incentive(spec.payoffs, s, u);
    case ProblemKind::Propaganda: return field_propaganda(spec.payoffs, s, u);
    case ProblemKind::Awareness: return field_awareness(spec.payoffs, s, u);
  }
  throw std::logic_error("unknown problem kind");
}

// Integrand of the objective.
inline double running_cost(const ProblemSpec& spec, const SystemState& s, double u) {
  if (spec.kind == ProblemKind::Incentive) return s.n * s.n;
  return 0.5 * (*spec.c1 * s.n * s.n - *spec.c2 * u * u);
}

inline double hamiltonian(const ProblemSpec& spec, const SystemState& s, const Costate& lam,
                          double u) {
  const StateVec f = controlled_field(spec, s, u);
  double h = lam.x * f[0] + lam.n * f[1];
  if (f.size() == 3) h += *lam.o * f[2];
  return h + running_cost(spec, s, u);
}

// Analytic costate dynamics, d(lambda)/dt = -dH/dy. The fitness difference
// g is affine in both arguments, so its partials are payoff-difference
// constants; every other term is a polynomial product.
inline StateVec costate_field(const ProblemSpec& spec, const SystemState& s, const Costate& lam,
                              double u) {
  const GamePayoffs& p = spec.payoffs;
  const double x = s.x;
  const double n = s.n;
  const double rate = env_growth_rate(p, x);              // -1 + (1+theta) x
  const double drate_dx = 1.0 + p.theta();

  if (spec.kind == ProblemKind::Incentive) {
    const double g = fitness_diff(p, x, n);
    const double gx = fitness_diff_dx(p, n);
    const double gn = fitness_diff_denv(p, x);
    const double dHdx = lam.x * ((1.0 - 2.0 * x) * g + x * (1.0 - x) * gx +
                                 (2.0 * x - 3.0 * x * x) * (1.0 - n) * u) +
                        lam.n * n * (1.0 - n) * drate_dx;
    const double dHdn = lam.x * (x * (1.0 - x) * gn - x * x * (1.0 - x) * u) +
                        lam.n * (1.0 - 2.0 * n) * rate + 2.0 * n;
    return StateVec{-dHdx, -dHdn};
  }

  const double o = *s.o;
  const double lo = *lam.o;
  const double g = fitness_diff(p, x, o);
  const double gx = fitness_diff_dx(p, o);
  const double go = fitness_diff_denv(p, x);
  const double gamma = p.gamma();
  const double dHdx =
      lam.x * ((1.0 - 2.0 * x) * g + x * (1.0 - x) * gx) + lam.n * n * (1.0 - n) * drate_dx;

  if (spec.kind == ProblemKind::Propaganda) {
    const double dHdn = lam.n * (1.0 - 2.0 * n) * rate + lo * gamma + *spec.c1 * n;
    const double dHdo = lam.x * x * (1.0 - x) * go + lo * (-gamma + (1.0 - 2.0 * o) * u);
    return StateVec{-dHdx, -dHdn, -dHdo};
  }

  // Awareness: do = -(gamma + u)(o - n).
  const double dHdn = lam.n * (1.0 - 2.0 * n) * rate + lo * (gamma + u) + *spec.c1 * n;
  const double dHdo = lam.x * x * (1.0 - x) * go - lo * (gamma + u);
  return StateVec{-dHdx, -dHdn, -dHdo};
}

// Switching function of the incentive problem: phi = x^2 (1-x)(1-n) lambda_x.
// The multiplier of lambda_x is positive on the interior, so sign(phi) =
// sign(lambda_x) there.
inline double switching_function(const SystemState& s, const Costate& lam) {
  return s.x * s.x * (1.0 - s.x) * (1.0 - s.n) * lam.x;
}

// Pointwise maximizer of the Hamiltonian over the admissible control set.
//   Incentive:  +-u_max by the sign of phi; +u_max at phi = 0.
//   Propaganda: the unconstrained concave maximizer lambda_o o(1-o)/C2.
//   Awareness:  max(0, -lambda_o (o-n)/C2), capped at kAwarenessControlCap.
inline double pointwise_maximizer(const ProblemSpec& spec, const SystemState& s,
                                  const Costate& lam) {
  switch (spec.kind) {
    case ProblemKind::Incentive: {
      const double phi = switching_function(s, lam);
      return phi >= 0.0 ? *spec.u_max : -*spec.u_max;
    }
    case ProblemKind::Propaganda:
      return *lam.o * *s.o * (1.0 - *s.o) / *spec.c2;
    case ProblemKind::Awareness: {
      const double u = -*lam.o * (*s.o - s.n) / *spec.c2;
      return std::min(std::max(0.0, u), kAwarenessControlCap);
    }
  }
  throw std::logic_error("unknown problem kind");
}

// Forward single shooting under a piecewise-constant control: the state is
// augmented with the running cost, and integration restarts at every control
// grid point so no step straddles a control discontinuity.
inline Trajectory forward_trajectory(const ProblemSpec& spec, const ControlSignal& u,
                                     const IntegratorConfig& cfg) {
  const std::size_t dim = spec.state_dim();
  StateVec y0(dim + 1);
  y0[0] = spec.initial.x;
  y0[1] = spec.initial.n;
  if (dim == 3) y0[2] = *spec.initial.o;
  y0[dim] = 0.0;

  Trajectory traj(0.0, y0, false);
  double h_hint = 0.0;
  StateVec y = y0;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const double ui = u.value(i);
    auto field = [&spec, dim, ui](double, const StateVec& v) {
      const SystemState s = SystemState::from_vec(v, dim);
      const StateVec f = controlled_field(spec, s, ui);
      StateVec out(dim + 1);
      for (std::size_t j = 0; j < dim; ++j) out[j] = f[j];
      out[dim] = running_cost(spec, s, ui);
      return out;
    };
    Trajectory cell =
        integrate(field, y, u.cell_start(i), u.cell_end(i), cfg, /*box_dims=*/dim, &h_hint);
    y = cell.end_state();
    traj.extend(std::move(cell));
  }
  return traj;
}

// Objective of the augmented forward trajectory: the cost coordinate at the
// horizon (dense-evaluated, so continuation tails do not contaminate it).
inline double objective(const ProblemSpec& spec, const Trajectory& forward) {
  const StateVec yT = forward.at(spec.horizon);
  return yT[spec.state_dim()];
}

// Backward costate sweep from the zero terminal condition; the stored forward
// trajectory supplies the state by dense interpolation.
inline Trajectory costate_trajectory(const ProblemSpec& spec, const Trajectory& forward,
                                     const ControlSignal& u, const IntegratorConfig& cfg) {
  const std::size_t dim = spec.state_dim();
  StateVec lamT(dim, 0.0);
  Trajectory traj(spec.horizon, lamT, true);
  double h_hint = 0.0;
  StateVec lam = lamT;
  for (std::size_t i = u.cells(); i-- > 0;) {
    const double ui = u.value(i);
    auto field = [&spec, &forward, dim, ui](double t, const StateVec& lv) {
      const SystemState s = SystemState::from_vec(forward.at(t), dim);
      return costate_field(spec, s, Costate::from_vec(lv), ui);
    };
    Trajectory cell = integrate(field, lam, u.cell_end(i), u.cell_start(i), cfg,
                                /*box_dims=*/0, &h_hint);
    lam = cell.end_state();
    traj.extend(std::move(cell));
  }
  return traj;
}

}  // namespace envgame

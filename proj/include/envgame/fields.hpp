#pragma once
// Controlled and uncontrolled vector fields of the coupled game-environment
// dynamics, the interior fixed point, and the bracket computation that rules
// out singular arcs of the incentive controller.

#include <cmath>
#include <optional>

#include "envgame/payoffs.hpp"
#include "envgame/state.hpp"

namespace envgame {

// Environmental growth rate per unit n(1-n): theta*x - (1-x) = -1 + (1+theta)x.
inline double env_growth_rate(const GamePayoffs& p, double x) {
  return -1.0 + (1.0 + p.theta()) * x;
}

// Uncontrolled two-state dynamics:
//   dx = x(1-x) g(x,n)
//   dn = n(1-n)(theta*x - (1-x))
inline StateVec field_base(const GamePayoffs& p, const SystemState& s) {
  const double g = fitness_diff(p, s.x, s.n);
  return StateVec{s.x * (1.0 - s.x) * g, s.n * (1.0 - s.n) * env_growth_rate(p, s.x)};
}

// Incentive-controlled dynamics: the control perturbs the deplete-state
// reward for mutual cooperation, which adds x^2 (1-x)(1-n) u to dx.
inline StateVec field_incentive(const GamePayoffs& p, const SystemState& s, double u) {
  StateVec f = field_base(p, s);
  f[0] += s.x * s.x * (1.0 - s.x) * (1.0 - s.n) * u;
  return f;
}

// Opinion-tracking dynamics: the population responds to the public opinion o
// rather than the true environment, and o relaxes towards n at rate gamma.
inline StateVec field_opinion(const GamePayoffs& p, const SystemState& s) {
  if (!s.o) throw ConfigError("state.o: opinion dynamics require a three-dimensional state");
  const double o = *s.o;
  const double g = fitness_diff(p, s.x, o);
  return StateVec{s.x * (1.0 - s.x) * g,
                  s.n * (1.0 - s.n) * env_growth_rate(p, s.x),
                  -p.gamma() * (o - s.n)};
}

// Propaganda-controlled dynamics: additive opinion perturbation o(1-o) u,
// which vanishes at extreme opinions.
inline StateVec field_propaganda(const GamePayoffs& p, const SystemState& s, double u) {
  StateVec f = field_opinion(p, s);
  const double o = *s.o;
  f[2] += o * (1.0 - o) * u;
  return f;
}

// Awareness-controlled dynamics: the control raises the learning rate,
// do = -(gamma + u)(o - n) with u >= 0.
inline StateVec field_awareness(const GamePayoffs& p, const SystemState& s, double u) {
  if (u < 0.0) throw ConfigError("control.u: awareness control must be non-negative");
  StateVec f = field_opinion(p, s);
  const double o = *s.o;
  f[2] = -(p.gamma() + u) * (o - s.n);
  return f;
}

// Interior rest point of the uncontrolled two-state dynamics, when one
// exists: x* = 1/(1+theta), and n* solves g(x*, n) = 0, which is linear in n:
//   n* = g0 / (g0 - g1),  g0 = g(x*, 0),  g1 = g(x*, 1).
// Empty when the solution is degenerate or falls outside (0,1).
inline std::optional<SystemState> interior_fixed_point(const GamePayoffs& p) {
  const double xs = critical_fraction(p);
  const double g0 = fitness_diff(p, xs, 0.0);
  const double g1 = fitness_diff(p, xs, 1.0);
  const double denom = g0 - g1;
  if (denom == 0.0) return std::nullopt;
  const double ns = g0 / denom;
  if (!(ns > 0.0 && ns < 1.0)) return std::nullopt;
  return SystemState{xs, ns, std::nullopt};
}

// Jacobian of field_base at an arbitrary point, row-major.
inline std::array<std::array<double, 2>, 2> base_jacobian(const GamePayoffs& p, double x,
                                                          double n) {
  const double g = fitness_diff(p, x, n);
  const double gx = fitness_diff_dx(p, n);
  const double gn = fitness_diff_denv(p, x);
  const double rate = env_growth_rate(p, x);
  return {{{(1.0 - 2.0 * x) * g + x * (1.0 - x) * gx, x * (1.0 - x) * gn},
           {n * (1.0 - n) * (1.0 + p.theta()), (1.0 - 2.0 * n) * rate}}};
}

// Bracket [F,G] of the drift F and the incentive control field
// G = [x^2 (1-x)(1-n), 0]^T, reduced by the common positive factor
// x^2 (1-x)(1-n) shared with G. The reduced second component is
// -n(1-n)(1+theta), nonzero on the interior, which certifies that G and
// [F,G] are linearly independent there (no singular arcs).
struct LieBracket {
  std::array<double, 2> reduced{};  // [F,G] / (x^2 (1-x)(1-n))
  double scale = 0.0;               // x^2 (1-x)(1-n)
  bool independent = false;         // reduced[1] != 0

  std::array<double, 2> full() const { return {scale * reduced[0], scale * reduced[1]}; }
};

inline LieBracket lie_bracket(const GamePayoffs& p, const SystemState& s) {
  const double x = s.x;
  const double n = s.n;
  const double g = fitness_diff(p, x, n);
  const double gx = fitness_diff_dx(p, n);
  LieBracket out;
  out.reduced = {g * (1.0 - x) - n * env_growth_rate(p, x) - x * (1.0 - x) * gx,
                 -n * (1.0 - n) * (1.0 + p.theta())};
  out.scale = x * x * (1.0 - x) * (1.0 - n);
  out.independent = out.reduced[1] != 0.0;
  return out;
}

}  // namespace envgame

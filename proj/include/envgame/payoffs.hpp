#pragma once
// Environment-dependent 2x2 game payoffs in the (R,S,T,P) convention and the
// cooperator-vs-defector fitness difference they induce.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "envgame/errors.hpp"

namespace envgame {

// Row-player payoffs: R mutual cooperation, S cooperating against a defector,
// T defecting against a cooperator, P mutual defection.
struct PayoffMatrix {
  double R = 0.0;
  double S = 0.0;
  double T = 0.0;
  double P = 0.0;

  static PayoffMatrix from_row(const std::array<double, 4>& rstp) {
    return PayoffMatrix{rstp[0], rstp[1], rstp[2], rstp[3]};
  }

  bool finite() const {
    return std::isfinite(R) && std::isfinite(S) && std::isfinite(T) && std::isfinite(P);
  }
};

inline bool operator==(const PayoffMatrix& a, const PayoffMatrix& b) {
  return a.R == b.R && a.S == b.S && a.T == b.T && a.P == b.P;
}

// The full parameterization of a feedback-evolving game: the game played in
// the replete state (a1), the game played in the deplete state (a0), the
// cooperator enhancement rate theta, and (for the opinion-tracking variants)
// the public learning rate gamma.
//
// The replete-state game must be a prisoner's dilemma (R1 < T1 and S1 < P1)
// so that defection dominates when resources are abundant.
class GamePayoffs {
 public:
  GamePayoffs(PayoffMatrix replete, PayoffMatrix deplete, double theta,
              std::optional<double> gamma = std::nullopt)
      : a1_(replete), a0_(deplete), theta_(theta), gamma_(gamma) {
    if (!a1_.finite()) throw ConfigError("payoffs.a1: entries must be finite");
    if (!a0_.finite()) throw ConfigError("payoffs.a0: entries must be finite");
    if (!(a1_.R < a1_.T) || !(a1_.S < a1_.P))
      throw ConfigError("payoffs.a1: replete-state game must have dominant defection (R < T and S < P)");
    if (!(theta_ > 0.0) || !std::isfinite(theta_))
      throw ConfigError("payoffs.theta: must be > 0");
    if (gamma_ && (!(*gamma_ > 0.0) || !std::isfinite(*gamma_)))
      throw ConfigError("payoffs.gamma: must be > 0 when present");
  }

  const PayoffMatrix& replete() const { return a1_; }
  const PayoffMatrix& deplete() const { return a0_; }
  double theta() const { return theta_; }
  bool has_gamma() const { return gamma_.has_value(); }
  double gamma() const {
    if (!gamma_) throw ConfigError("payoffs.gamma: required by opinion dynamics but absent");
    return *gamma_;
  }

 private:
  PayoffMatrix a1_;
  PayoffMatrix a0_;
  double theta_;
  std::optional<double> gamma_;
};

// Convex blend of the two games at environment level env in [0,1]:
// env * a1 + (1 - env) * a0, entrywise.
inline PayoffMatrix blend_payoffs(const GamePayoffs& p, double env) {
  const PayoffMatrix& a1 = p.replete();
  const PayoffMatrix& a0 = p.deplete();
  const double w = 1.0 - env;
  return PayoffMatrix{env * a1.R + w * a0.R, env * a1.S + w * a0.S,
                      env * a1.T + w * a0.T, env * a1.P + w * a0.P};
}

// Fitness difference g between cooperators and defectors at cooperator
// fraction x, with payoffs blended at environment level env:
//   g(x, env) = (R_env - T_env) x + (S_env - P_env)(1 - x).
// env is the true environment n in the two-state model and the public
// opinion o in the opinion models.
inline double fitness_diff(const GamePayoffs& p, double x, double env) {
  const PayoffMatrix a = blend_payoffs(p, env);
  return (a.R - a.T) * x + (a.S - a.P) * (1.0 - x);
}

// dg/dx at environment level env (independent of x; g is affine in x).
inline double fitness_diff_dx(const GamePayoffs& p, double env) {
  const PayoffMatrix a = blend_payoffs(p, env);
  return (a.R - a.T) - (a.S - a.P);
}

// dg/denv at cooperator fraction x (independent of env; g is affine in env).
inline double fitness_diff_denv(const GamePayoffs& p, double x) {
  const PayoffMatrix& a1 = p.replete();
  const PayoffMatrix& a0 = p.deplete();
  const double dR = (a1.R - a1.T) - (a0.R - a0.T);
  const double dS = (a1.S - a1.P) - (a0.S - a0.P);
  return dR * x + dS * (1.0 - x);
}

// Cooperator fraction x_c = 1/(1+theta) at which the environmental growth
// rate theta*x - (1-x) changes sign.
inline double critical_fraction(const GamePayoffs& p) { return 1.0 / (1.0 + p.theta()); }

}  // namespace envgame

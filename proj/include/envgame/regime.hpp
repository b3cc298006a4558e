#pragma once
// Operational classifier for the long-run outcome of the uncontrolled
// dynamics: tragedy (TOC1-TOC4, keyed to the deplete-state game class),
// averted tragedy (V1, V2), or an oscillating tragedy (OTOC).
//
// V2 and OTOC require an interior rest point (stable, resp. unstable). The
// remaining labels are resolved by the deplete-state game class together
// with a long-horizon diagnostic simulation from (0.5, 0.5).

#include <array>
#include <complex>
#include <optional>
#include <string>

#include "envgame/fields.hpp"
#include "envgame/rk45.hpp"

namespace envgame {

enum class Regime { TOC1, TOC2, TOC3, TOC4, V1, V2, OTOC };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::TOC1: return "TOC1";
    case Regime::TOC2: return "TOC2";
    case Regime::TOC3: return "TOC3";
    case Regime::TOC4: return "TOC4";
    case Regime::V1: return "V1";
    case Regime::V2: return "V2";
    case Regime::OTOC: return "OTOC";
  }
  return "?";
}

// Strict sign pattern of (R0-T0, S0-P0) for the deplete-state game.
enum class GameClass {
  DefectionDominant,    // R0 < T0, S0 < P0
  Coordination,         // R0 > T0, S0 < P0
  AntiCoordination,     // R0 < T0, S0 > P0
  CooperationDominant,  // R0 > T0, S0 > P0
  Degenerate            // a tie in either difference
};

inline const char* to_string(GameClass c) {
  switch (c) {
    case GameClass::DefectionDominant: return "defection-dominant";
    case GameClass::Coordination: return "coordination";
    case GameClass::AntiCoordination: return "anti-coordination";
    case GameClass::CooperationDominant: return "cooperation-dominant";
    case GameClass::Degenerate: return "degenerate";
  }
  return "?";
}

inline GameClass deplete_game_class(const GamePayoffs& p) {
  const double dr = p.deplete().R - p.deplete().T;
  const double ds = p.deplete().S - p.deplete().P;
  if (dr == 0.0 || ds == 0.0) return GameClass::Degenerate;
  if (dr > 0.0) return ds > 0.0 ? GameClass::CooperationDominant : GameClass::Coordination;
  return ds > 0.0 ? GameClass::AntiCoordination : GameClass::DefectionDominant;
}

struct RegimeReport {
  Regime label = Regime::TOC2;
  GameClass deplete_class = GameClass::DefectionDominant;
  std::optional<SystemState> fixed_point;
  std::array<std::complex<double>, 2> eigenvalues{};  // meaningful iff fixed_point
  bool boundary_case = false;  // an eigenvalue real part within 1e-9 of zero, or a payoff tie
  // Diagnostic simulation summary.
  double n_final = 0.0;
  double n_max_late = 0.0;  // max of n over the final quarter of the run
  int oscillations = 0;     // episodes with n > 0.8 separated by episodes with n < 0.2
  bool depleted = false;    // n stayed below 0.05 through the final quarter
};

namespace regime_detail {

inline constexpr double kEigenvalueTol = 1e-9;
inline constexpr double kDiagnosticHorizon = 400.0;
inline constexpr double kDepletedLevel = 0.05;

inline std::array<std::complex<double>, 2> eigenvalues_2x2(
    const std::array<std::array<double, 2>, 2>& m) {
  const double tr = m[0][0] + m[1][1];
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

struct Diagnostic {
  double n_final = 0.0;
  double n_max_late = 0.0;
  int oscillations = 0;
  bool depleted = false;
};

inline Diagnostic diagnose(const GamePayoffs& p) {
  IntegratorConfig cfg;
  cfg.max_step = 0.25;
  auto field = [&p](double, const StateVec& v) {
    return field_base(p, SystemState{v[0], v[1], std::nullopt});
  };
  const Trajectory traj =
      integrate(field, StateVec{0.5, 0.5}, 0.0, kDiagnosticHorizon, cfg, /*box_dims=*/2);

  Diagnostic d;
  d.n_final = traj.end_state()[1];
  bool seen_high = false;
  double late_max = 0.0;
  const double dt = 0.05;
  for (double t = 0.0; t <= kDiagnosticHorizon + 1e-9; t += dt) {
    const double n = traj.at(std::min(t, kDiagnosticHorizon))[1];
    if (n > 0.8 && !seen_high) {
      seen_high = true;
      ++d.oscillations;
    } else if (n < 0.2 && seen_high) {
      seen_high = false;
    }
    if (t >= 0.75 * kDiagnosticHorizon) late_max = std::max(late_max, n);
  }
  d.n_max_late = late_max;
  d.depleted = late_max < kDepletedLevel;
  return d;
}

inline Regime toc_label(GameClass c) {
  switch (c) {
    case GameClass::Coordination: return Regime::TOC1;
    case GameClass::DefectionDominant: return Regime::TOC2;
    case GameClass::AntiCoordination: return Regime::TOC3;
    default: return Regime::TOC4;
  }
}

}  // namespace regime_detail

inline RegimeReport classify_regime(const GamePayoffs& p) {
  using namespace regime_detail;
  RegimeReport rep;
  rep.deplete_class = deplete_game_class(p);
  rep.fixed_point = interior_fixed_point(p);
  if (rep.deplete_class == GameClass::Degenerate) rep.boundary_case = true;

  const Diagnostic diag = diagnose(p);
  rep.n_final = diag.n_final;
  rep.n_max_late = diag.n_max_late;
  rep.oscillations = diag.oscillations;
  rep.depleted = diag.depleted;

  if (rep.fixed_point) {
    const auto jac = base_jacobian(p, rep.fixed_point->x, rep.fixed_point->n);
    rep.eigenvalues = eigenvalues_2x2(jac);
    const double re_max = std::max(rep.eigenvalues[0].real(), rep.eigenvalues[1].real());
    if (std::abs(re_max) <= kEigenvalueTol) rep.boundary_case = true;
    if (re_max < -kEigenvalueTol) {
      rep.label = Regime::V2;
      return rep;
    }
    // Unstable interior rest point: an attracting corner cycle presents as
    // repeated full-range swings of n; otherwise the run settles on the
    // boundary and the deplete-state game class decides the tragedy label.
    if (diag.oscillations >= 3) {
      rep.label = Regime::OTOC;
    } else if (diag.depleted) {
      rep.label = toc_label(rep.deplete_class);
    } else if (diag.n_max_late > 0.8) {
      rep.label = Regime::OTOC;
    } else {
      rep.label = Regime::V1;
      rep.boundary_case = true;
    }
    return rep;
  }

  rep.label = diag.depleted ? toc_label(rep.deplete_class) : Regime::V1;
  return rep;
}

}  // namespace envgame

#pragma once
// Locates the isolated switch times of a bang-bang incentive control from
// the sign changes of the switching function, and scans for singular-arc
// candidates (none should exist; finding one is a regression alarm).

#include <cmath>
#include <utility>
#include <vector>

#include "envgame/problem.hpp"

namespace envgame {

struct SwitchingRecord {
  double time = 0.0;
  double phi = 0.0;  // residual switching-function value at the located time
  double u_before = 0.0;
  double u_after = 0.0;
  double phi_dot = 0.0;  // <lambda, [F,G]> at the crossing
  bool transversal = false;
};

struct SwitchScan {
  std::vector<SwitchingRecord> switches;
  // Grid intervals longer than one cell on which |phi| stays below 1e-10.
  std::vector<std::pair<double, double>> singular_candidates;
};

inline constexpr double kSwitchTimeResolution = 1e-6;
inline constexpr double kSingularPhiThreshold = 1e-10;

inline SwitchScan detect_switches(const ProblemSpec& spec, const Trajectory& forward,
                                  const Trajectory& costate, const ControlSignal& u) {
  SwitchScan scan;
  auto phi_at = [&](double t) {
    const SystemState s = SystemState::from_vec(forward.at(t), 2);
    const Costate lam = Costate::from_vec(costate.at(t));
    return switching_function(s, lam);
  };

  const std::size_t cells = u.cells();
  std::vector<double> phis(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    phis[i] = phi_at(i < cells ? u.cell_start(i) : u.horizon());

  std::size_t small_run_start = 0;
  bool in_small_run = false;
  for (std::size_t i = 0; i <= cells; ++i) {
    const bool small = std::abs(phis[i]) < kSingularPhiThreshold;
    if (small && !in_small_run) {
      in_small_run = true;
      small_run_start = i;
    }
    if ((!small || i == cells) && in_small_run) {
      const std::size_t last = small ? i : i - 1;
      if (last > small_run_start + 1) {
        scan.singular_candidates.emplace_back(u.cell_start(small_run_start),
                                              last < cells ? u.cell_start(last) : u.horizon());
      }
      in_small_run = false;
    }
  }

  for (std::size_t i = 0; i < cells; ++i) {
    const double ta = u.cell_start(i);
    const double tb = i + 1 < cells ? u.cell_start(i + 1) : u.horizon();
    if (!(phis[i] * phis[i + 1] < 0.0)) continue;

    double lo = ta, hi = tb;
    double flo = phis[i];
    while (hi - lo > kSwitchTimeResolution) {
      const double mid = 0.5 * (lo + hi);
      const double fmid = phi_at(mid);
      if (flo * fmid <= 0.0) {
        hi = mid;
      } else {
        lo = mid;
        flo = fmid;
      }
    }
    const double ts = 0.5 * (lo + hi);

    SwitchingRecord rec;
    rec.time = ts;
    rec.phi = phi_at(ts);
    rec.u_before = u.at(std::max(ts - u.dt(), 0.0));
    rec.u_after = u.at(std::min(ts + u.dt(), u.horizon()));
    const SystemState s = SystemState::from_vec(forward.at(ts), 2);
    const Costate lam = Costate::from_vec(costate.at(ts));
    const auto fg = lie_bracket(spec.payoffs, s).full();
    rec.phi_dot = lam.x * fg[0] + lam.n * fg[1];
    rec.transversal = std::abs(rec.phi_dot) > 1e-12 * (1.0 + std::abs(lam.x) + std::abs(lam.n));
    scan.switches.push_back(rec);
  }
  return scan;
}

}  // namespace envgame

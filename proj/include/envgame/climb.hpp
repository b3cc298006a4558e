#pragma once
// Hamiltonian-based hill climbing with Armijo step sizes.
//
// Each iteration solves the state forward and the costate backward, takes
// the pointwise Hamiltonian maximizer on the control grid as the ascent
// direction u*, measures optimality by
//   Theta(u) = int_0^Tf H(y, lambda, u) - H(y, lambda, u*) dt  (<= 0),
// and steps u <- u + beta^ell (u* - u) with the smallest ell satisfying the
// sufficient-increase test. Theta == 0 characterizes controls satisfying the
// maximum principle.

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envgame/problem.hpp"
#include "envgame/switching.hpp"

namespace envgame {

inline constexpr double kThetaConvergenceTol = 1e-10;

struct OptimizerConfig {
  double alpha = 0.5;
  double beta = 0.5;
  int iters = 20;
  int ell_max = 30;
  double grid_dt = 0.01;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("optimizer.alpha: must be in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("optimizer.beta: must be in (0,1)");
    if (iters < 1) throw ConfigError("optimizer.iters: must be >= 1");
    if (ell_max < 1) throw ConfigError("optimizer.ell_max: must be >= 1");
    if (!(grid_dt > 0.0)) throw ConfigError("optimizer.grid_dt: must be > 0");
  }
};

// Numerical failure inside the optimization loop, tagged with the iteration.
struct OptimizeError : std::runtime_error {
  int iteration;
  OptimizeError(int iter, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iter) + ": " + what), iteration(iter) {}
};

struct IterationLog {
  int iter = 0;
  double objective = 0.0;
  double theta = 0.0;
  int ell = -1;  // -1: no step taken (final evaluation, convergence, or stall)
  double wall_ms = 0.0;
};

struct RunRecord {
  std::vector<IterationLog> iterations;
  ControlSignal control;  // final iterate
  Trajectory forward;     // cost-augmented state under the final control
  Trajectory costate;
  double objective_value = 0.0;
  double theta_value = 0.0;
  bool converged = false;
  bool stalled = false;
  SwitchScan switches;  // incentive runs only
  std::vector<std::string> warnings;
};

enum class InitControl { Zero, SignThreshold };

inline const char* to_string(InitControl k) {
  return k == InitControl::Zero ? "zero" : "sign-threshold";
}

// Initial control guesses: all-zero, or the state-feedback sign rule
// u0 = u_max * sgn(x - x_c) with sgn(0) taken as +1. The sign rule is
// materialized once, cell by cell, along the trajectory it generates, so its
// switches line up with the crossings of x_c (the critical points of n)
// under the control itself.
inline ControlSignal make_initial_control(InitControl kind, const ProblemSpec& spec,
                                          const OptimizerConfig& ocfg,
                                          const IntegratorConfig& icfg) {
  ControlSignal u(spec.horizon, ocfg.grid_dt);
  if (kind == InitControl::Zero) return u;
  if (spec.kind != ProblemKind::Incentive)
    throw ConfigError("optimizer.init_control: sign-threshold requires the incentive problem");
  const double xc = critical_fraction(spec.payoffs);
  StateVec y{spec.initial.x, spec.initial.n};
  double hint = 0.0;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const double ui = y[0] >= xc ? *spec.u_max : -*spec.u_max;
    u.set_value(i, ui);
    auto field = [&spec, ui](double, const StateVec& v) {
      return field_incentive(spec.payoffs, SystemState::from_vec(v, 2), ui);
    };
    Trajectory cell = integrate(field, y, u.cell_start(i), u.cell_end(i), icfg, 2, &hint);
    y = cell.end_state();
  }
  return u;
}

struct AscentResult {
  ControlSignal direction;
  Trajectory forward;
  Trajectory costate;
  double objective = 0.0;
  bool capped = false;  // awareness maximizer hit its cap somewhere
};

// Forward pass, backward pass, and the pointwise maximizer sampled at the
// left endpoint of every grid cell, held zero-order.
inline AscentResult ascent_direction(const ProblemSpec& spec, const ControlSignal& u,
                                     const IntegratorConfig& icfg) {
  Trajectory forward = forward_trajectory(spec, u, icfg);
  Trajectory costate = costate_trajectory(spec, forward, u, icfg);
  const double j = objective(spec, forward);
  const std::size_t dim = spec.state_dim();

  ControlSignal dir(u.horizon(), u.dt());
  bool capped = false;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const double t = u.cell_start(i);
    const SystemState s = SystemState::from_vec(forward.at(t), dim);
    const Costate lam = Costate::from_vec(costate.at(t));
    const double us = pointwise_maximizer(spec, s, lam);
    if (spec.kind == ProblemKind::Awareness && us == kAwarenessControlCap) capped = true;
    dir.set_value(i, us);
  }
  return AscentResult{std::move(dir), std::move(forward), std::move(costate), j, capped};
}

// Composite trapezoid of the Hamiltonian gap over the control grid. Every
// sampled gap is non-positive because u*(t_i) maximizes H at exactly the
// sampled (y, lambda); the endpoint maximizer is recomputed at t = Tf.
inline double theta(const ProblemSpec& spec, const ControlSignal& u, const ControlSignal& u_star,
                    const Trajectory& forward, const Trajectory& costate) {
  const std::size_t dim = spec.state_dim();
  const std::size_t cells = u.cells();
  auto gap_at = [&](double t, double uc, std::optional<double> us) {
    const SystemState s = SystemState::from_vec(forward.at(t), dim);
    const Costate lam = Costate::from_vec(costate.at(t));
    const double umax = us ? *us : pointwise_maximizer(spec, s, lam);
    return hamiltonian(spec, s, lam, uc) - hamiltonian(spec, s, lam, umax);
  };

  double acc = 0.5 * gap_at(0.0, u.value(0), u_star.value(0));
  for (std::size_t i = 1; i < cells; ++i)
    acc += gap_at(u.cell_start(i), u.value(i), u_star.value(i));
  acc += 0.5 * gap_at(u.horizon(), u.value(cells - 1), std::nullopt);
  return acc * u.dt();
}

// Smallest ell in {0..ell_max} passing the sufficient-increase test
//   J(u) - J(u + beta^ell (u* - u)) <= alpha beta^ell Theta(u).
// eval is called with the step factor beta^ell and returns the candidate
// objective; nullopt when every ell fails.
template <typename Eval>
std::optional<std::pair<int, double>> smallest_armijo_ell(double j0, double theta_value,
                                                          double alpha, double beta, int ell_max,
                                                          Eval&& eval) {
  double step = 1.0;
  for (int ell = 0; ell <= ell_max; ++ell) {
    const double j_cand = eval(step);
    if (j0 - j_cand <= alpha * step * theta_value) return std::make_pair(ell, j_cand);
    step *= beta;
  }
  return std::nullopt;
}

enum class StepStatus { Stepped, Converged, Stalled };

struct ArmijoResult {
  ControlSignal next;
  int ell = -1;
  StepStatus status = StepStatus::Stepped;
  double next_objective = 0.0;
};

inline ArmijoResult armijo_step(const ProblemSpec& spec, const ControlSignal& u,
                                const ControlSignal& u_star, double j0, double theta_value,
                                const OptimizerConfig& ocfg, const IntegratorConfig& icfg) {
  if (theta_value >= -kThetaConvergenceTol)
    return ArmijoResult{u, -1, StepStatus::Converged, j0};

  ControlSignal candidate(u.horizon(), u.dt());
  auto eval = [&](double step) {
    for (std::size_t i = 0; i < u.cells(); ++i)
      candidate.set_value(i, u.value(i) + step * (u_star.value(i) - u.value(i)));
    return objective(spec, forward_trajectory(spec, candidate, icfg));
  };
  const auto found =
      smallest_armijo_ell(j0, theta_value, ocfg.alpha, ocfg.beta, ocfg.ell_max, eval);
  if (!found) return ArmijoResult{u, -1, StepStatus::Stalled, j0};

  // Rebuild the accepted candidate (eval leaves the last trial in place).
  double step = 1.0;
  for (int i = 0; i < found->first; ++i) step *= ocfg.beta;
  for (std::size_t i = 0; i < u.cells(); ++i)
    candidate.set_value(i, u.value(i) + step * (u_star.value(i) - u.value(i)));
  return ArmijoResult{std::move(candidate), found->first, StepStatus::Stepped, found->second};
}

using ProgressFn = std::function<void(const IterationLog&)>;

// Full optimizer loop. Runs cfg.iters iterations (or stops early on
// convergence or a stalled line search) and finishes with one more
// forward/backward evaluation so the record reports the final iterate's
// objective and optimality. Purely deterministic for fixed inputs.
inline RunRecord optimize(const ProblemSpec& spec, const ControlSignal& u0,
                          const OptimizerConfig& ocfg, const IntegratorConfig& icfg,
                          const ProgressFn& progress = {}) {
  spec.validate();
  ocfg.validate();

  std::vector<IterationLog> logs;
  std::vector<std::string> warnings;
  ControlSignal u = u0;

  for (int k = 0;; ++k) {
    const auto tic = std::chrono::steady_clock::now();
    AscentResult asc = [&] {
      try {
        return ascent_direction(spec, u, icfg);
      } catch (const IntegrationError& e) {
        throw OptimizeError(k, e.what());
      }
    }();
    if (asc.capped)
      warnings.push_back("iteration " + std::to_string(k) + ": awareness control capped at " +
                         std::to_string(kAwarenessControlCap));
    const double th = theta(spec, u, asc.direction, asc.forward, asc.costate);

    IterationLog log;
    log.iter = k;
    log.objective = asc.objective;
    log.theta = th;

    auto finish = [&](bool converged, bool stalled) {
      log.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic)
              .count();
      logs.push_back(log);
      if (progress) progress(log);
      SwitchScan scan;
      if (spec.kind == ProblemKind::Incentive)
        scan = detect_switches(spec, asc.forward, asc.costate, u);
      return RunRecord{std::move(logs),        std::move(u),
                       std::move(asc.forward), std::move(asc.costate),
                       asc.objective,          th,
                       converged,              stalled,
                       std::move(scan),        std::move(warnings)};
    };

    const bool converged_now = th >= -kThetaConvergenceTol;
    if (k >= ocfg.iters || converged_now) return finish(converged_now, false);

    ArmijoResult arm = [&] {
      try {
        return armijo_step(spec, u, asc.direction, asc.objective, th, ocfg, icfg);
      } catch (const IntegrationError& e) {
        throw OptimizeError(k, e.what());
      }
    }();
    if (arm.status == StepStatus::Stalled) {
      warnings.push_back("iteration " + std::to_string(k) + ": line search stalled (no ell <= " +
                         std::to_string(ocfg.ell_max) + " accepted)");
      return finish(false, true);
    }
    u = std::move(arm.next);
    log.ell = arm.ell;
    log.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic).count();
    logs.push_back(log);
    if (progress) progress(log);
  }
}

}  // namespace envgame

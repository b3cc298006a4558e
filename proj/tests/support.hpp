#pragma once
// Shared helpers for the test suites: deterministic RNG, finite differences,
// a plain fixed-step RK4 reference integrator, and filesystem scratch dirs.

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "envgame/state.hpp"

namespace testsupport {

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

// Central difference d/dx f(x) with step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  const double scale = std::max({std::abs(got), std::abs(want), 1e-12});
  return std::abs(got - want) / scale;
}

// Classic fixed-step RK4, independent of the adaptive production integrator.
inline envgame::StateVec rk4_integrate(
    const std::function<envgame::StateVec(double, const envgame::StateVec&)>& f,
    envgame::StateVec y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    const envgame::StateVec k1 = f(t, y);
    const envgame::StateVec k2 = f(t + 0.5 * h, envgame::sum_scaled(y, 0.5 * h, k1));
    const envgame::StateVec k3 = f(t + 0.5 * h, envgame::sum_scaled(y, 0.5 * h, k2));
    const envgame::StateVec k4 = f(t + h, envgame::sum_scaled(y, h, k3));
    for (std::size_t j = 0; j < y.size(); ++j)
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    t += h;
  }
  return y;
}

inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::current_path() / "test-scratch" / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport

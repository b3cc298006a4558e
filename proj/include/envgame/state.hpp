#pragma once
// System state, costate, and the small fixed-capacity vector both map onto.

#include <array>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <optional>

#include "envgame/errors.hpp"

namespace envgame {

// Fixed-capacity vector used for states, costates, and cost-augmented states.
// Dimensions in this model are at most 4 (x, n, o, running cost).
class StateVec {
 public:
  static constexpr std::size_t kCap = 4;

  StateVec() = default;
  explicit StateVec(std::size_t n, double fill = 0.0) : n_(n) {
    assert(n <= kCap);
    for (std::size_t i = 0; i < n_; ++i) v_[i] = fill;
  }
  StateVec(std::initializer_list<double> xs) : n_(xs.size()) {
    assert(xs.size() <= kCap);
    std::size_t i = 0;
    for (double x : xs) v_[i++] = x;
  }

  std::size_t size() const { return n_; }
  double& operator[](std::size_t i) {
    assert(i < n_);
    return v_[i];
  }
  double operator[](std::size_t i) const {
    assert(i < n_);
    return v_[i];
  }

  StateVec head(std::size_t k) const {
    assert(k <= n_);
    StateVec out(k);
    for (std::size_t i = 0; i < k; ++i) out.v_[i] = v_[i];
    return out;
  }

 private:
  std::array<double, kCap> v_{};
  std::size_t n_ = 0;
};

inline bool operator==(const StateVec& a, const StateVec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// y += c * z
inline void add_scaled(StateVec& y, double c, const StateVec& z) {
  assert(y.size() == z.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * z[i];
}

inline StateVec sum_scaled(const StateVec& y, double c, const StateVec& z) {
  StateVec out = y;
  add_scaled(out, c, z);
  return out;
}

// Point of the coupled dynamics: cooperator fraction x, environment n, and
// (for the opinion models) public opinion o. All coordinates live in [0,1].
struct SystemState {
  double x = 0.0;
  double n = 0.0;
  std::optional<double> o;

  std::size_t dims() const { return o ? 3 : 2; }

  bool in_unit_box(double slack = 0.0) const {
    auto ok = [slack](double v) { return v >= -slack && v <= 1.0 + slack; };
    return ok(x) && ok(n) && (!o || ok(*o));
  }

  // Strictly interior, as required of initial states for optimization runs.
  bool interior() const {
    auto in = [](double v) { return v > 0.0 && v < 1.0; };
    return in(x) && in(n) && (!o || in(*o));
  }

  StateVec to_vec() const {
    if (o) return StateVec{x, n, *o};
    return StateVec{x, n};
  }

  static SystemState from_vec(const StateVec& v) {
    if (v.size() >= 3) return SystemState{v[0], v[1], v[2]};
    return SystemState{v[0], v[1], std::nullopt};
  }

  // Leading `dims` coordinates of a (possibly cost-augmented) vector.
  static SystemState from_vec(const StateVec& v, std::size_t dims) {
    if (dims >= 3) return SystemState{v[0], v[1], v[2]};
    return SystemState{v[0], v[1], std::nullopt};
  }
};

// Adjoint vector paired with a SystemState, one multiplier per coordinate.
// Terminal condition for all formulations is the zero vector.
struct Costate {
  double x = 0.0;
  double n = 0.0;
  std::optional<double> o;

  std::size_t dims() const { return o ? 3 : 2; }

  static Costate zero(std::size_t dims) {
    if (dims >= 3) return Costate{0.0, 0.0, 0.0};
    return Costate{0.0, 0.0, std::nullopt};
  }

  StateVec to_vec() const {
    if (o) return StateVec{x, n, *o};
    return StateVec{x, n};
  }

  static Costate from_vec(const StateVec& v) {
    if (v.size() >= 3) return Costate{v[0], v[1], v[2]};
    return Costate{v[0], v[1], std::nullopt};
  }
};

}  // namespace envgame

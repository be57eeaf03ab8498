#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "ftform/types.hpp"

// Fixed-step explicit integrators. The closed-loop right-hand side is
// discontinuous, so no error control is attempted.

namespace ftform {

enum class Integrator { euler, rk4 };

inline std::string_view to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk4"; }

inline Integrator parse_integrator(std::string_view s) {
  if (s == "euler") return Integrator::euler;
  if (s == "rk4") return Integrator::rk4;
  throw ValidationError("sim.integrator: expected 'euler' or 'rk4', got '" + std::string(s) + "'");
}

/// `rhs(x, t)` returns dx/dt.
template <class State, class Rhs>
State step_euler(const State& x, double t, double dt, Rhs&& rhs) {
  return x + dt * rhs(x, t);
}

template <class State, class Rhs>
State step_rk4(const State& x, double t, double dt, Rhs&& rhs) {
  const State k1 = rhs(x, t);
  const State k2 = rhs(State(x + 0.5 * dt * k1), t + 0.5 * dt);
  const State k3 = rhs(State(x + 0.5 * dt * k2), t + 0.5 * dt);
  const State k4 = rhs(State(x + dt * k3), t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class State, class Rhs>
State step(Integrator method, const State& x, double t, double dt, Rhs&& rhs) {
  if (method == Integrator::euler) return step_euler(x, t, dt, std::forward<Rhs>(rhs));
  return step_rk4(x, t, dt, std::forward<Rhs>(rhs));
}

}  // namespace ftform

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ftform/kinematics.hpp"
#include "ftform/types.hpp"

namespace ftform {

struct ControlConfig {
  double k = 1.0;
  /// Weight of the fast (beta) term; 0 disables it.
  double k_prime = 0.0;
  double alpha = 0.5;
  /// Known bound on the leaders' speed.
  double gamma = 1.0;
  /// Signum boundary-layer width; 0 gives the exact signum.
  double eps = 1e-3;

  double beta() const { return 2.0 - alpha; }

  void validate() const {
    if (!(k > 0.0)) throw ValidationError("control.k must be > 0");
    if (!(k_prime >= 0.0)) throw ValidationError("control.k_prime must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("control.alpha must lie in (0,1)");
    if (!(gamma > 0.0)) throw ValidationError("control.gamma must be > 0");
    if (!(eps >= 0.0)) throw ValidationError("control.eps must be >= 0");
  }
};

enum class ControlLaw { basic, fixed_time, modulated, modulated_fixed_time };

inline std::string_view to_string(ControlLaw law) {
  switch (law) {
    case ControlLaw::basic: return "basic";
    case ControlLaw::fixed_time: return "fixed_time";
    case ControlLaw::modulated: return "modulated";
    case ControlLaw::modulated_fixed_time: return "modulated_fixed_time";
  }
  return "basic";
}

inline ControlLaw parse_control_law(std::string_view s) {
  if (s == "basic") return ControlLaw::basic;
  if (s == "fixed_time") return ControlLaw::fixed_time;
  if (s == "modulated") return ControlLaw::modulated;
  if (s == "modulated_fixed_time") return ControlLaw::modulated_fixed_time;
  throw ValidationError("control.law: unknown law '" + std::string(s) + "'");
}

inline bool is_modulated(ControlLaw law) {
  return law == ControlLaw::modulated || law == ControlLaw::modulated_fixed_time;
}

inline bool has_fast_term(ControlLaw law) {
  return law == ControlLaw::fixed_time || law == ControlLaw::modulated_fixed_time;
}

/// Per-follower error quantities, all in the follower's own frame.
/// e in length^2, z in length^3.
struct ErrorState {
  Vec e;
  Mat P;
  Vec z;
};

/// e_k = ||p_{j_k i}||^2 - (d*_{j_k i})^2.
inline Vec squared_distance_errors(std::span<const Vec> displacements, std::span<const double> desired) {
  if (displacements.size() != desired.size())
    throw std::invalid_argument("squared_distance_errors: length mismatch");
  Vec e(static_cast<Eigen::Index>(displacements.size()));
  for (std::size_t k = 0; k < displacements.size(); ++k)
    e[static_cast<Eigen::Index>(k)] = displacements[k].squaredNorm() - desired[k] * desired[k];
  return e;
}

/// z = -sum_k e_k p_k.
inline Vec compute_z(const Vec& e, std::span<const Vec> displacements) {
  if (static_cast<std::size_t>(e.size()) != displacements.size())
    throw std::invalid_argument("compute_z: length mismatch");
  if (displacements.empty()) return Vec();
  Vec z = Vec::Zero(displacements.front().size());
  for (std::size_t k = 0; k < displacements.size(); ++k) z -= e[static_cast<Eigen::Index>(k)] * displacements[k];
  return z;
}

inline ErrorState error_state(std::span<const Vec> displacements, std::span<const double> desired) {
  ErrorState s;
  s.e = squared_distance_errors(displacements, desired);
  const auto d = displacements.empty() ? 0 : displacements.front().size();
  s.P.resize(d, static_cast<Eigen::Index>(displacements.size()));
  for (std::size_t k = 0; k < displacements.size(); ++k) s.P.col(static_cast<Eigen::Index>(k)) = displacements[k];
  s.z = -(s.P * s.e);
  return s;
}

/// u = -k sgn^a(z) - gamma sgn(z).
inline Vec control_basic(const Vec& z, const ControlConfig& cfg) {
  return -cfg.k * sgn_alpha(z, cfg.alpha) - cfg.gamma * sgn_elementwise(z, cfg.eps);
}

/// Adds -k' sgn^b(z), b = 2 - a.
inline Vec control_fixed_time(const Vec& z, const ControlConfig& cfg) {
  Vec u = control_basic(z, cfg);
  if (cfg.k_prime != 0.0) u -= cfg.k_prime * sgn_alpha(z, cfg.beta());
  return u;
}

/// Switching gain gamma * ||h||_1: every row of 1_{d,q}|h| equals ||h||_1.
inline Vec control_modulated(const Vec& z, const Eigen::VectorXd& h_now, const ControlConfig& cfg) {
  return -cfg.k * sgn_alpha(z, cfg.alpha) - cfg.gamma * h_now.lpNorm<1>() * sgn_elementwise(z, cfg.eps);
}

inline Vec control_modulated_fixed_time(const Vec& z, const Eigen::VectorXd& h_now, const ControlConfig& cfg) {
  Vec u = control_modulated(z, h_now, cfg);
  if (cfg.k_prime != 0.0) u -= cfg.k_prime * sgn_alpha(z, cfg.beta());
  return u;
}

/// Dispatch on the law. `h_l1` is ||h(t)||_1 and only read by modulated laws.
inline Vec apply_control(ControlLaw law, const Vec& z, double h_l1, const ControlConfig& cfg) {
  const double switching = is_modulated(law) ? cfg.gamma * h_l1 : cfg.gamma;
  Vec u = -cfg.k * sgn_alpha(z, cfg.alpha) - switching * sgn_elementwise(z, cfg.eps);
  if (has_fast_term(law) && cfg.k_prime != 0.0) u -= cfg.k_prime * sgn_alpha(z, cfg.beta());
  return u;
}

/// V = 1/4 sum e_k^2, in length^4.
inline double lyapunov_V(const Vec& e) { return 0.25 * e.squaredNorm(); }

}  // namespace ftform

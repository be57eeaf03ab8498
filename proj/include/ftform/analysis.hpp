#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ftform/simulator.hpp"

// Post-hoc checks on recorded trajectories. Everything here reads only the
// Trajectory (plus the control gains where a bound needs them).

namespace ftform {

/// max_k |e_k| over the follower's own edges at one sample.
inline double follower_error(const Trajectory& tr, int ordinal, std::size_t sample) {
  double m = 0.0;
  for (int c : tr.follower_constraints[static_cast<std::size_t>(ordinal)])
    m = std::max(m, std::abs(tr.errors[sample][c]));
  return m;
}

/// Earliest recorded t with |e_ji(s)| <= delta for every s in [t, t + window]
/// (the window must fit inside the record).
inline std::optional<double> convergence_time(const Trajectory& tr, int follower, double delta, double window) {
  const int k = tr.follower_index(follower);
  const std::size_t n = tr.size();
  if (n == 0) return std::nullopt;
  if (window > tr.times.back() - tr.times.front() + 1e-12)
    throw std::invalid_argument("convergence_time: window longer than the horizon");
  const double tol = 1e-9 * std::max(1.0, window);
  std::optional<double> best;
  std::size_t run_end = n;  // last index of the current good run, n = none
  for (std::size_t s = n; s-- > 0;) {
    if (follower_error(tr, k, s) <= delta) {
      if (run_end == n) run_end = s;
      if (tr.times[run_end] - tr.times[s] >= window - tol) best = tr.times[s];
    } else {
      run_end = n;
    }
  }
  return best;
}

/// Central-difference velocity of an agent at an interior sample.
inline Vec fd_velocity(const Trajectory& tr, int agent, std::size_t s) {
  return (tr.position(s + 1, agent) - tr.position(s - 1, agent)) / (tr.times[s + 1] - tr.times[s - 1]);
}

/// max over t >= t_from of ||v_i - f||, both velocities by central differences
/// (f is read off the first leader's recorded motion).
inline double velocity_mismatch(const Trajectory& tr, int follower, double t_from) {
  tr.follower_index(follower);
  if (tr.size() < 3 || t_from >= tr.times.back())
    throw std::invalid_argument("velocity_mismatch: t_from must precede the last interior sample");
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < tr.size(); ++s) {
    if (tr.times[s] < t_from) continue;
    worst = std::max(worst, (fd_velocity(tr, follower, s) - fd_velocity(tr, 0, s)).norm());
  }
  return worst;
}

/// Steps with V(t+dt) > V(t) + slack_scale (1 + V(t)).
inline int monotonicity_violations(std::span<const double> v, double slack_scale) {
  int count = 0;
  for (std::size_t s = 0; s + 1 < v.size(); ++s)
    if (v[s + 1] > v[s] + slack_scale * (1.0 + v[s])) ++count;
  return count;
}

inline std::vector<double> v_series(const Trajectory& tr, int follower, double until = std::numeric_limits<double>::infinity()) {
  const int k = tr.follower_index(follower);
  std::vector<double> out;
  for (std::size_t s = 0; s < tr.size() && tr.times[s] <= until; ++s) out.push_back(tr.V[s][k]);
  return out;
}

/// Counts forward-difference samples violating dV/dt <= -k ||z||^(alpha+1),
/// with slack slack_scale (1 + ||z||^(alpha+1)). Only samples with t < until
/// are examined. Meaningful for exact-signum runs.
inline int vdot_bound_check(const Trajectory& tr, int follower, const ControlConfig& cfg, double slack_scale,
                            double until = std::numeric_limits<double>::infinity()) {
  const int k = tr.follower_index(follower);
  int count = 0;
  for (std::size_t s = 0; s + 1 < tr.size() && tr.times[s] < until; ++s) {
    const double dt = tr.times[s + 1] - tr.times[s];
    const double rate = (tr.V[s + 1][k] - tr.V[s][k]) / dt;
    const double zp = std::pow(tr.z_norms[s][k], cfg.alpha + 1.0);
    if (rate > -cfg.k * zp + slack_scale * (1.0 + zp)) ++count;
  }
  return count;
}

struct ControlBound {
  double max_norm = 0.0;
  /// k max||z||^a + k' max||z||^b + gamma max||h||_1 sqrt(d)
  double ceiling = 0.0;
};

inline ControlBound control_boundedness(const Trajectory& tr, int follower, const ControlConfig& cfg, ControlLaw law) {
  const int k = tr.follower_index(follower);
  ControlBound out;
  double zmax = 0.0;
  double hmax = is_modulated(law) ? 0.0 : 1.0;
  for (std::size_t s = 0; s < tr.size(); ++s) {
    out.max_norm = std::max(out.max_norm, tr.control_norms[s][k]);
    zmax = std::max(zmax, tr.z_norms[s][k]);
    if (is_modulated(law)) hmax = std::max(hmax, tr.h_l1[s]);
  }
  out.ceiling = cfg.k * std::pow(zmax, cfg.alpha) + cfg.gamma * hmax * std::sqrt(static_cast<double>(tr.d));
  if (has_fast_term(law)) out.ceiling += cfg.k_prime * std::pow(zmax, cfg.beta());
  return out;
}

/// tau(a) - tau(b) per follower; empty when either run did not converge.
inline std::vector<std::optional<double>> compare_convergence(const Trajectory& a, const Trajectory& b, double delta,
                                                              double window) {
  if (a.followers != b.followers) throw std::invalid_argument("compare_convergence: different follower sets");
  std::vector<std::optional<double>> out;
  for (int f : a.followers) {
    const auto ta = convergence_time(a, f, delta, window);
    const auto tb = convergence_time(b, f, delta, window);
    out.push_back(ta && tb ? std::optional<double>(*ta - *tb) : std::nullopt);
  }
  return out;
}

struct AnalysisOptions {
  double delta = 1e-3;
  double window = 0.5;
  /// Monotonicity slack is monotonicity_slack * dt * (1 + V).
  double monotonicity_slack = 1e-6;
  double vdot_slack = 1e-3;
};

struct FollowerReport {
  int id = 0;
  double V0 = 0.0;
  std::optional<double> tau;
  double max_residual_after = 0.0;
  double max_velocity_mismatch_after = 0.0;
  int monotonicity_violations = 0;
  int vdot_violations = 0;
  double max_control = 0.0;
  double control_ceiling = 0.0;
};

struct ConvergenceReport {
  double delta = 0.0;
  double window = 0.0;
  /// The derivative checks hold only for the exact signum (eps = 0).
  bool exact_signum = false;
  std::vector<FollowerReport> followers;

  bool all_converged() const {
    return std::all_of(followers.begin(), followers.end(), [](const FollowerReport& f) { return f.tau.has_value(); });
  }

  std::optional<double> formation_time() const {
    if (!all_converged() || followers.empty()) return std::nullopt;
    double t = 0.0;
    for (const auto& f : followers) t = std::max(t, *f.tau);
    return t;
  }
};

inline ConvergenceReport analyze(const Trajectory& tr, const SimConfig& cfg, const AnalysisOptions& opt = {}) {
  ConvergenceReport rep;
  rep.delta = opt.delta;
  rep.window = std::min(opt.window, tr.size() ? tr.times.back() : 0.0);
  rep.exact_signum = cfg.control.eps == 0.0;
  for (const auto& [id, c] : cfg.control_overrides) rep.exact_signum = rep.exact_signum && c.eps == 0.0;
  if (tr.size() == 0) return rep;
  const double dt = tr.size() > 1 ? tr.times[1] - tr.times[0] : cfg.dt;
  for (int f : tr.followers) {
    const int k = tr.follower_index(f);
    const auto& c = cfg.control_for(f);
    FollowerReport fr;
    fr.id = f;
    fr.V0 = tr.V.front()[k];
    fr.tau = convergence_time(tr, f, opt.delta, rep.window);
    const double until = fr.tau.value_or(std::numeric_limits<double>::infinity());
    if (fr.tau) {
      for (std::size_t s = 0; s < tr.size(); ++s)
        if (tr.times[s] >= *fr.tau) fr.max_residual_after = std::max(fr.max_residual_after, follower_error(tr, k, s));
      if (tr.size() >= 3 && *fr.tau < tr.times[tr.size() - 2])
        fr.max_velocity_mismatch_after = velocity_mismatch(tr, f, *fr.tau);
    }
    fr.monotonicity_violations = monotonicity_violations(v_series(tr, f, until), opt.monotonicity_slack * dt);
    fr.vdot_violations = vdot_bound_check(tr, f, c, opt.vdot_slack, until);
    const auto bound = control_boundedness(tr, f, c, cfg.law);
    fr.max_control = bound.max_norm;
    fr.control_ceiling = bound.ceiling;
    rep.followers.push_back(fr);
  }
  return rep;
}

}  // namespace ftform

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftform/basin.hpp"
#include "ftform/control_laws.hpp"
#include "ftform/formation_graph.hpp"
#include "ftform/integrators.hpp"
#include "ftform/kinematics.hpp"
#include "ftform/leader_profile.hpp"

namespace ftform {

struct SimConfig {
  std::string name;
  FormationGraph graph;
  DistanceSpec spec;
  /// Indexed by agent id.
  std::vector<AgentState> initial_states;
  LeaderVelocityProfile leader_profile = ConstantVelocity{};
  ControlConfig control;
  /// Per-follower replacements of `control`, keyed by agent id.
  std::map<int, ControlConfig> control_overrides;
  ControlLaw law = ControlLaw::basic;
  double dt = 1e-3;
  double t_end = 1.0;
  Integrator integrator = Integrator::rk4;
  std::uint64_t seed = 0;
  /// Record every k-th step (the initial and final states are always kept).
  int record_every = 1;

  const ControlConfig& control_for(int agent) const {
    const auto it = control_overrides.find(agent);
    return it == control_overrides.end() ? control : it->second;
  }

  Stacked initial_positions() const {
    Stacked x(graph.n * graph.d);
    for (int i = 0; i < graph.n; ++i) x.segment(i * graph.d, graph.d) = initial_states[i].position;
    return x;
  }
};

/// Recorded closed-loop history. Per-follower series are indexed by the
/// follower's ordinal (agent id minus d).
struct Trajectory {
  int n = 0;
  int d = 2;
  std::vector<Constraint> constraints;
  std::vector<double> desired;  // d* per constraint
  std::vector<int> followers;
  std::vector<std::vector<int>> follower_constraints;

  std::vector<double> times;
  std::vector<Stacked> positions;
  std::vector<Eigen::VectorXd> errors;
  std::vector<Eigen::VectorXd> V;
  std::vector<Eigen::VectorXd> control_norms;
  std::vector<Eigen::VectorXd> z_norms;
  /// ||h(t)||_1 of the known modulation signal (1 for unmodulated profiles).
  std::vector<double> h_l1;

  std::size_t size() const { return times.size(); }

  int follower_index(int agent) const {
    const auto it = std::find(followers.begin(), followers.end(), agent);
    if (it == followers.end()) throw std::invalid_argument("unknown follower id " + std::to_string(agent + 1));
    return static_cast<int>(it - followers.begin());
  }

  Vec position(std::size_t sample, int agent) const { return block(positions[sample], agent, d); }
};

/// Evaluates all agents' velocities for a fixed configuration.
class ClosedLoop {
 public:
  struct FollowerTerms {
    ErrorState err;
    Vec u_local;
  };

  explicit ClosedLoop(const SimConfig& cfg) : cfg_(&cfg), d_(cfg.graph.d) {
    for (int i = cfg.graph.d; i < cfg.graph.n; ++i) {
      Follower f;
      f.id = i;
      f.neighbors = cfg.graph.neighbors(i);
      for (int j : f.neighbors) f.desired.push_back(cfg.spec.at(i, j));
      f.frame = cfg.initial_states[i].frame;
      f.control = cfg.control_for(i);
      followers_.push_back(std::move(f));
    }
  }

  const SimConfig& config() const { return *cfg_; }

  FollowerTerms follower_terms(const Stacked& x, int ordinal, double h_l1) const {
    const auto& f = followers_[static_cast<std::size_t>(ordinal)];
    const Vec pi = block(x, f.id, d_);
    Vec disp[kMaxDim];
    for (std::size_t k = 0; k < f.neighbors.size(); ++k)
      disp[k] = local_displacement(block(x, f.neighbors[k], d_), pi, f.frame);
    FollowerTerms out;
    out.err = error_state(std::span<const Vec>(disp, f.neighbors.size()), f.desired);
    out.u_local = apply_control(cfg_->law, out.err.z, h_l1, f.control);
    return out;
  }

  const FrameRotation& frame(int ordinal) const { return followers_[static_cast<std::size_t>(ordinal)].frame; }
  int follower_count() const { return static_cast<int>(followers_.size()); }

  Stacked operator()(const Stacked& x, double t) const {
    Stacked v(x.size());
    const Vec f = leader_velocity(cfg_->leader_profile, x, t);
    for (int i = 0; i < cfg_->graph.d; ++i) v.segment(i * d_, d_) = f;
    const double h_l1 = known_signal_l1(cfg_->leader_profile, t);
    for (int k = 0; k < follower_count(); ++k) {
      const auto terms = follower_terms(x, k, h_l1);
      v.segment(followers_[static_cast<std::size_t>(k)].id * d_, d_) = frame(k).to_global(terms.u_local);
    }
    return v;
  }

 private:
  struct Follower {
    int id = 0;
    std::vector<int> neighbors;
    std::vector<double> desired;
    FrameRotation frame;
    ControlConfig control;
  };

  const SimConfig* cfg_;
  int d_;
  std::vector<Follower> followers_;
};

inline Stacked closed_loop_rhs(const Stacked& state, double t, const SimConfig& cfg) {
  return ClosedLoop(cfg)(state, t);
}

struct BasinCheck {
  int follower = 0;
  double V0 = 0.0;
  double theta = 0.0;
  bool inside = false;
};

struct ValidationReport {
  std::vector<BasinCheck> basin;
  std::vector<std::string> warnings;
};

/// Throws ValidationError on the first violated assumption; returns
/// non-fatal findings (the basin comparison, planar only) otherwise.
inline ValidationReport validate_config(const SimConfig& cfg) {
  const auto& g = cfg.graph;
  const int d = g.d;
  validate_procedure1(g);
  const auto ag = augment_leader_clique(g);
  if (!generically_rigid(ag, cfg.seed ^ 0x9e3779b97f4a7c15ULL))
    throw ValidationError("augmented graph is not generically rigid", 1);

  validate_distance_spec(cfg.spec, ag);
  double dmax = 0.0;
  for (const auto& [c, v] : cfg.spec.distances) dmax = std::max(dmax, v);
  const double len_tol = 1e-9 * std::max(1.0, dmax);
  if (cfg.spec.desired_realization) {
    Realization r{*cfg.spec.desired_realization, d};
    if (r.positions.size() != static_cast<Eigen::Index>(g.n) * d)
      throw ValidationError("desired realization has the wrong dimension", 2);
    if (!verify_realizable(cfg.spec, r, len_tol))
      throw ValidationError("desired realization does not satisfy the desired distances", 2);
    if (!rigidity_rank_check(r, ag)) throw ValidationError("desired realization is not rigid", 2);
  }

  if (!(cfg.dt > 0.0)) throw ValidationError("sim.dt must be > 0");
  if (!(cfg.t_end > 0.0)) throw ValidationError("sim.t_end must be > 0");
  if (cfg.record_every < 1) throw ValidationError("sim.record_every must be >= 1");
  cfg.control.validate();
  for (const auto& [id, c] : cfg.control_overrides) {
    if (!g.is_follower(id)) throw ValidationError("control.overrides: agent " + std::to_string(id + 1) + " is not a follower");
    c.validate();
  }
  if (is_modulated(cfg.law) && !std::holds_alternative<ModulatedVelocity>(cfg.leader_profile))
    throw ValidationError("control.law: modulated laws need a modulated leader profile");

  if (cfg.initial_states.size() != static_cast<std::size_t>(g.n))
    throw ValidationError("initial states: expected " + std::to_string(g.n) + " agents");
  for (int i = 0; i < g.n; ++i) {
    const auto& s = cfg.initial_states[i];
    if (s.position.size() != d || s.frame.dim() != d)
      throw ValidationError("agent " + std::to_string(i + 1) + ": position/frame dimension must be " + std::to_string(d));
    if (!s.position.allFinite()) throw ValidationError("agent " + std::to_string(i + 1) + ": non-finite position");
    if ((s.role == Role::leader) != g.is_leader(i))
      throw ValidationError("agent " + std::to_string(i + 1) + ": role does not match the graph");
    if (s.role == Role::leader && !s.frame.matrix().isIdentity(1e-12))
      throw ValidationError("leader " + std::to_string(i + 1) + " must use the global frame", 3);
  }

  const Stacked x0 = cfg.initial_positions();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double dist = (block(x0, j, d) - block(x0, i, d)).norm();
      if (std::abs(dist - cfg.spec.at(i, j)) > len_tol)
        throw ValidationError("leaders " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                  " start at distance " + std::to_string(dist) + " instead of " +
                                  std::to_string(cfg.spec.at(i, j)),
                              3);
    }

  double gamma_min = cfg.control.gamma;
  for (const auto& [id, c] : cfg.control_overrides) gamma_min = std::min(gamma_min, c.gamma);
  validate_profile(cfg.leader_profile, gamma_min, cfg.t_end, d);

  ValidationReport report;
  ClosedLoop loop(cfg);
  const double h0 = known_signal_l1(cfg.leader_profile, 0.0);
  for (int k = 0; k < loop.follower_count(); ++k) {
    const int i = d + k;
    const auto terms = loop.follower_terms(x0, k, h0);
    const double scale = std::pow(std::max(1.0, terms.err.P.cwiseAbs().maxCoeff()), d);
    if (std::abs(terms.err.P.determinant()) <= 1e-9 * scale)
      throw ValidationError("follower " + std::to_string(i + 1) + " starts degenerate with its neighbours", 3);
    if (d == 2) {
      const auto nb = g.neighbors(i);
      BasinCheck b;
      b.follower = i;
      b.V0 = lyapunov_V(terms.err.e);
      try {
        b.theta = vartheta_2d(cfg.spec.at(nb[0], nb[1]) / 2.0, cfg.spec.at(i, nb[0]), cfg.spec.at(i, nb[1])).theta;
        b.inside = check_basin(b.V0, b.theta);
        if (!b.inside)
          report.warnings.push_back("follower " + std::to_string(i + 1) + ": V(0)=" + std::to_string(b.V0) +
                                    " is not below the basin threshold " + std::to_string(b.theta));
      } catch (const std::exception& ex) {
        report.warnings.push_back("follower " + std::to_string(i + 1) + ": basin threshold unavailable (" +
                                  ex.what() + ")");
      }
      report.basin.push_back(b);
    }
  }
  return report;
}

inline Trajectory make_trajectory_shell(const SimConfig& cfg) {
  Trajectory tr;
  tr.n = cfg.graph.n;
  tr.d = cfg.graph.d;
  tr.constraints = augment_leader_clique(cfg.graph).constraints();
  for (const auto& c : tr.constraints) tr.desired.push_back(cfg.spec.at(c.a, c.b));
  for (int i = cfg.graph.d; i < cfg.graph.n; ++i) {
    tr.followers.push_back(i);
    std::vector<int> idx;
    for (int j : cfg.graph.neighbors(i)) {
      const auto c = Constraint::of(i, j);
      idx.push_back(static_cast<int>(std::find(tr.constraints.begin(), tr.constraints.end(), c) - tr.constraints.begin()));
    }
    tr.follower_constraints.push_back(std::move(idx));
  }
  return tr;
}

inline void record_sample(Trajectory& tr, const ClosedLoop& loop, const Stacked& x, double t) {
  const auto& cfg = loop.config();
  const int d = tr.d;
  Eigen::VectorXd e(static_cast<Eigen::Index>(tr.constraints.size()));
  for (std::size_t k = 0; k < tr.constraints.size(); ++k) {
    const auto [a, b] = tr.constraints[k];
    e[static_cast<Eigen::Index>(k)] = (block(x, b, d) - block(x, a, d)).squaredNorm() - tr.desired[k] * tr.desired[k];
  }
  const auto m = static_cast<Eigen::Index>(tr.followers.size());
  Eigen::VectorXd v(m), un(m), zn(m);
  const double h_l1 = known_signal_l1(cfg.leader_profile, t);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto terms = loop.follower_terms(x, static_cast<int>(k), h_l1);
    v[k] = lyapunov_V(terms.err.e);
    un[k] = terms.u_local.norm();
    zn[k] = terms.err.z.norm();
  }
  tr.times.push_back(t);
  tr.positions.push_back(x);
  tr.errors.push_back(std::move(e));
  tr.V.push_back(std::move(v));
  tr.control_norms.push_back(std::move(un));
  tr.z_norms.push_back(std::move(zn));
  tr.h_l1.push_back(h_l1);
}

/// Fixed-step integration of the closed loop from t = 0 to t_end.
inline Trajectory simulate(const SimConfig& cfg) {
  validate_config(cfg);
  ClosedLoop loop(cfg);
  Trajectory tr = make_trajectory_shell(cfg);
  Stacked x = cfg.initial_positions();
  const auto steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
  const auto expected = static_cast<std::size_t>(steps / cfg.record_every + 2);
  tr.times.reserve(expected);
  tr.positions.reserve(expected);
  record_sample(tr, loop, x, 0.0);
  for (long s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s - 1) * cfg.dt;
    Stacked next = step(cfg.integrator, x, t, cfg.dt, loop);
    if (!next.allFinite())
      throw SimulationError("non-finite state at t=" + std::to_string(t + cfg.dt), t);
    x = std::move(next);
    if (s % cfg.record_every == 0 || s == steps) record_sample(tr, loop, x, static_cast<double>(s) * cfg.dt);
  }
  return tr;
}

}  // namespace ftform

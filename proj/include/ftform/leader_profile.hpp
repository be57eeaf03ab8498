#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ftform/types.hpp"

namespace ftform {

enum class Trig { sin, cos };

/// amplitude * fn(rate * t)
struct TrigTerm {
  Trig fn = Trig::sin;
  double rate = 1.0;
  double amplitude = 1.0;

  double operator()(double t) const {
    return amplitude * (fn == Trig::sin ? std::sin(rate * t) : std::cos(rate * t));
  }
};

struct ConstantVelocity {
  Vec v;
};

/// f_k(t) = amplitude * sin(a_k t) for even k, amplitude * cos(a_k t) for odd k.
struct SinusoidVelocity {
  double amplitude = 1.0;
  std::vector<double> frequencies;
};

/// f(t) = scale * G(t) h(t). G is d x q and unknown to the followers; h is
/// the known q-vector signal they use to modulate the switching gain.
struct ModulatedVelocity {
  double scale = 1.0;
  std::vector<std::vector<TrigTerm>> g;  // d rows, q columns
  std::vector<TrigTerm> h;

  Eigen::MatrixXd G(double t) const {
    const auto rows = static_cast<Eigen::Index>(g.size());
    const auto cols = rows ? static_cast<Eigen::Index>(g.front().size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * g[r][c](t);
    return m;
  }

  Eigen::VectorXd h_at(double t) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(h.size()));
    for (std::size_t k = 0; k < h.size(); ++k) out[static_cast<Eigen::Index>(k)] = h[k](t);
    return out;
  }
};

using LeaderVelocityProfile = std::variant<ConstantVelocity, SinusoidVelocity, ModulatedVelocity>;

/// Common leader velocity f(p, t). The bundled profiles do not depend on p.
inline Vec leader_velocity(const LeaderVelocityProfile& profile, double t) {
  struct Visitor {
    double t;
    Vec operator()(const ConstantVelocity& c) const { return c.v; }
    Vec operator()(const SinusoidVelocity& s) const {
      Vec f(static_cast<Eigen::Index>(s.frequencies.size()));
      for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
        const double arg = s.frequencies[k] * t;
        f[static_cast<Eigen::Index>(k)] = s.amplitude * (k % 2 == 0 ? std::sin(arg) : std::cos(arg));
      }
      return f;
    }
    Vec operator()(const ModulatedVelocity& m) const {
      double h[8];
      const std::size_t q = std::min<std::size_t>(m.h.size(), 8);
      for (std::size_t c = 0; c < q; ++c) h[c] = m.h[c](t);
      Vec f = Vec::Zero(static_cast<Eigen::Index>(m.g.size()));
      for (std::size_t r = 0; r < m.g.size(); ++r)
        for (std::size_t c = 0; c < q; ++c) f[static_cast<Eigen::Index>(r)] += m.scale * m.g[r][c](t) * h[c];
      return f;
    }
  };
  return std::visit(Visitor{t}, profile);
}

inline Vec leader_velocity(const LeaderVelocityProfile& profile, const Stacked& /*positions*/, double t) {
  return leader_velocity(profile, t);
}

/// ||h(t)||_1 for modulated profiles, 1 otherwise.
inline double known_signal_l1(const LeaderVelocityProfile& profile, double t) {
  const auto* m = std::get_if<ModulatedVelocity>(&profile);
  if (!m) return 1.0;
  double sum = 0.0;
  for (const auto& term : m->h) sum += std::abs(term(t));
  return sum;
}

inline int profile_dim(const LeaderVelocityProfile& profile) {
  struct Visitor {
    int operator()(const ConstantVelocity& c) const { return static_cast<int>(c.v.size()); }
    int operator()(const SinusoidVelocity& s) const { return static_cast<int>(s.frequencies.size()); }
    int operator()(const ModulatedVelocity& m) const { return static_cast<int>(m.g.size()); }
  };
  return std::visit(Visitor{}, profile);
}

/// Dense-sampling check of the leader-speed assumption on [0, t_end]:
/// ||f|| <= gamma for plain profiles, ||G||_F <= gamma for modulated ones
/// (there ||f|| may reach gamma ||h||_2, which the modulated gain covers).
inline void validate_profile(const LeaderVelocityProfile& profile, double gamma, double t_end, int d,
                             int samples = 20001) {
  if (profile_dim(profile) != d)
    throw ValidationError("leaders.profile: velocity dimension does not match graph.d", 3);
  const auto* mod = std::get_if<ModulatedVelocity>(&profile);
  if (mod) {
    if (mod->h.empty() || mod->h.size() > 8) throw ValidationError("leaders.profile.h must have 1 to 8 entries", 3);
    for (const auto& row : mod->g)
      if (row.size() != mod->h.size())
        throw ValidationError("leaders.profile: G must have as many columns as h has entries", 3);
  }
  const double slack = 1e-12 * std::max(1.0, gamma);
  for (int s = 0; s < samples; ++s) {
    const double t = t_end * static_cast<double>(s) / static_cast<double>(samples - 1);
    if (mod) {
      if (mod->G(t).norm() > gamma + slack)
        throw ValidationError("leaders.profile: ||G||_F exceeds gamma at t=" + std::to_string(t), 3);
    } else if (leader_velocity(profile, t).norm() > gamma + slack) {
      throw ValidationError("leaders.profile: speed exceeds gamma at t=" + std::to_string(t), 3);
    }
  }
}

}  // namespace ftform

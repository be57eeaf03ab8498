#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftform/types.hpp"

// Agent indices are 0-based in this library: leaders are 0..d-1 and
// followers d..n-1. File formats and the CLI use 1-based ids.

namespace ftform {

/// Directed sensing edge: `from` measures and controls its distance to `to`.
struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Unordered distance constraint, always stored with a < b.
struct Constraint {
  int a = 0;
  int b = 0;

  static Constraint of(int i, int j) { return i < j ? Constraint{i, j} : Constraint{j, i}; }

  friend bool operator==(const Constraint&, const Constraint&) = default;
  friend auto operator<=>(const Constraint&, const Constraint&) = default;
};

struct FormationGraph {
  int n = 0;
  int d = 2;
  std::vector<Edge> edges;

  bool is_leader(int i) const { return i >= 0 && i < d; }
  bool is_follower(int i) const { return i >= d && i < n; }
  int follower_count() const { return n - d; }

  /// N_i in increasing order.
  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (const auto& e : edges)
      if (e.from == i) out.push_back(e.to);
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline FormationGraph build_procedure1_graph(int n, int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (n < d) throw std::invalid_argument("need n >= d agents (got n=" + std::to_string(n) + ")");
  FormationGraph g{n, d, {}};
  for (int i = d; i < n; ++i)
    for (int j = i - d; j < i; ++j) g.edges.push_back({i, j});
  return g;
}

/// Kahn's algorithm; self-loops count as cycles.
inline bool verify_acyclic(const FormationGraph& g) {
  std::vector<int> indeg(static_cast<std::size_t>(g.n), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.n));
  for (const auto& e : g.edges) {
    if (e.from < 0 || e.from >= g.n || e.to < 0 || e.to >= g.n) return false;
    out[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::queue<int> ready;
  for (int i = 0; i < g.n; ++i)
    if (indeg[i] == 0) ready.push(i);
  int seen = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++seen;
    for (int w : out[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  return seen == g.n;
}

/// Throws unless `g` is exactly a leader-follower graph from the incremental
/// construction (each follower senses the d agents preceding it).
inline void validate_procedure1(const FormationGraph& g) {
  if (g.d != 2 && g.d != 3) throw ValidationError("graph.d must be 2 or 3", 1);
  if (g.n < g.d) throw ValidationError("graph.n must be >= graph.d", 1);
  if (!verify_acyclic(g)) throw ValidationError("sensing graph has a directed cycle", 1);
  for (int i = 0; i < g.n; ++i) {
    const auto nb = g.neighbors(i);
    if (g.is_leader(i)) {
      if (!nb.empty()) throw ValidationError("leader " + std::to_string(i + 1) + " has outgoing edges", 1);
      continue;
    }
    std::vector<int> expected;
    for (int j = i - g.d; j < i; ++j) expected.push_back(j);
    if (nb != expected)
      throw ValidationError("follower " + std::to_string(i + 1) + " must sense exactly the " +
                                std::to_string(g.d) + " preceding agents",
                            1);
  }
}

/// The sensing graph plus all ordered leader pairs.
struct AugmentedGraph {
  FormationGraph base;
  std::vector<Edge> extra_edges;

  std::vector<Edge> edges() const {
    auto all = base.edges;
    all.insert(all.end(), extra_edges.begin(), extra_edges.end());
    return all;
  }

  /// Unordered constraints: leader pairs first, then each follower's edges
  /// in follower order. Trajectory error columns use this order.
  std::vector<Constraint> constraints() const {
    std::vector<Constraint> out;
    for (const auto& e : extra_edges)
      if (e.from < e.to) out.push_back(Constraint::of(e.from, e.to));
    for (const auto& e : base.edges) {
      const auto c = Constraint::of(e.from, e.to);
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
  }
};

inline AugmentedGraph augment_leader_clique(const FormationGraph& g) {
  AugmentedGraph ag{g, {}};
  for (int i = 0; i < g.d && i < g.n; ++i)
    for (int j = 0; j < g.d && j < g.n; ++j)
      if (i != j) ag.extra_edges.push_back({i, j});
  return ag;
}

/// Stacked coordinates of all agents.
struct Realization {
  Stacked positions;
  int d = 2;

  int agents() const { return static_cast<int>(positions.size()) / d; }
  Vec point(int i) const { return block(positions, i, d); }
};

struct DistanceSpec {
  std::map<Constraint, double> distances;
  std::optional<Stacked> desired_realization;

  double at(int i, int j) const {
    const auto it = distances.find(Constraint::of(i, j));
    if (it == distances.end())
      throw std::out_of_range("no desired distance for pair (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ")");
    return it->second;
  }
};

inline DistanceSpec distances_from_realization(const AugmentedGraph& ag, const Realization& r) {
  DistanceSpec spec;
  for (const auto& c : ag.constraints()) spec.distances[c] = (r.point(c.b) - r.point(c.a)).norm();
  spec.desired_realization = r.positions;
  return spec;
}

/// Every constraint of the augmented graph has exactly one positive distance.
inline void validate_distance_spec(const DistanceSpec& spec, const AugmentedGraph& ag) {
  const auto cs = ag.constraints();
  for (const auto& c : cs) {
    const auto it = spec.distances.find(c);
    if (it == spec.distances.end())
      throw ValidationError("missing desired distance for edge (" + std::to_string(c.a + 1) + "," +
                                std::to_string(c.b + 1) + ")",
                            2);
    if (!(it->second > 0.0) || !std::isfinite(it->second))
      throw ValidationError("desired distance for edge (" + std::to_string(c.a + 1) + "," +
                                std::to_string(c.b + 1) + ") must be positive",
                            2);
  }
  if (spec.distances.size() != cs.size())
    throw ValidationError("desired distances given for pairs that are not edges of the augmented graph", 2);
}

inline Eigen::MatrixXd rigidity_matrix(const Realization& r, const AugmentedGraph& ag) {
  const int n = ag.base.n;
  const int d = ag.base.d;
  if (r.d != d || r.positions.size() != static_cast<Eigen::Index>(n) * d)
    throw std::invalid_argument("rigidity_matrix: realization dimension does not match graph");
  const auto cs = ag.constraints();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cs.size()), n * d);
  for (std::size_t row = 0; row < cs.size(); ++row) {
    const auto [i, j] = cs[row];
    const Vec diff = r.point(i) - r.point(j);
    m.block(static_cast<Eigen::Index>(row), i * d, 1, d) = diff.transpose();
    m.block(static_cast<Eigen::Index>(row), j * d, 1, d) = -diff.transpose();
  }
  return m;
}

/// Singular values above max(rows, cols) * sigma_max * 1e-12.
inline int numeric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  const double thresh = static_cast<double>(std::max(m.rows(), m.cols())) * s[0] * 1e-12;
  return static_cast<int>((s.array() > thresh).count());
}

inline int infinitesimal_rigidity_rank(const AugmentedGraph& ag) {
  const int d = ag.base.d;
  return d * ag.base.n - d * (d + 1) / 2;
}

inline bool rigidity_rank_check(const Realization& r, const AugmentedGraph& ag) {
  return numeric_rank(rigidity_matrix(r, ag)) == infinitesimal_rigidity_rank(ag);
}

/// Rank test at a random realization, the usual surrogate for generic rigidity.
inline bool generically_rigid(const AugmentedGraph& ag, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Realization r{Stacked(ag.base.n * ag.base.d), ag.base.d};
  for (Eigen::Index k = 0; k < r.positions.size(); ++k) r.positions[k] = u(rng);
  return rigidity_rank_check(r, ag);
}

inline bool verify_realizable(const DistanceSpec& spec, const Realization& r, double tol) {
  for (const auto& [c, dist] : spec.distances) {
    if (c.b >= r.agents()) throw std::invalid_argument("verify_realizable: realization too small");
    if (std::abs((r.point(c.b) - r.point(c.a)).norm() - dist) > tol) return false;
  }
  return true;
}

}  // namespace ftform

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "ftform/control_laws.hpp"
#include "ftform/types.hpp"

// Basin-of-attraction threshold and the finite-time constants.
//
// The undesired equilibria of a follower are the configurations where the
// aggregated signal z vanishes while some distance error does not. The
// smallest Lyapunov value over that set is the threshold: starting strictly
// below it guarantees convergence to the desired distances.

namespace ftform {

/// Real roots of x^3 + p x + q, ascending, each Newton-polished.
/// Complex pairs are kept only when their imaginary part is <= 1e-10.
inline std::vector<double> depressed_cubic_roots(double p, double q) {
  std::vector<double> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (p == 0.0 && q == 0.0) {
    roots = {0.0};
  } else if (disc < 0.0) {
    // three distinct real roots
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
  } else {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + s);
    const double v = std::cbrt(-q / 2.0 - s);
    roots.push_back(u + v);
    if (std::abs(std::sqrt(3.0) / 2.0 * (u - v)) <= 1e-10) roots.push_back(-(u + v) / 2.0);
  }
  for (double& x : roots) {
    for (int it = 0; it < 8; ++it) {
      const double f = (x * x + p) * x + q;
      const double df = 3.0 * x * x + p;
      if (df == 0.0 || f == 0.0) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(x))) break;
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double x : roots)
    if (unique.empty() || std::abs(x - unique.back()) > 1e-9 * std::max(1.0, std::abs(x))) unique.push_back(x);
  return unique;
}

struct ThetaResult {
  double theta = 0.0;
  /// Abscissae of all collinear critical configurations.
  std::vector<double> roots;
  std::vector<double> values;
  /// True when both errors vanish there (the root lies in the desired set).
  std::vector<bool> desired;
};

/// Planar threshold: neighbours at (-a, 0) and (a, 0), desired distances b
/// and c from the follower to them.
inline ThetaResult vartheta_2d(double a, double b, double c) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw std::invalid_argument("vartheta_2d: a, b, c must be positive");
  if (!(2.0 * a < b + c && b < 2.0 * a + c && c < 2.0 * a + b))
    throw std::invalid_argument("vartheta_2d: distances violate the triangle inequality");
  // ((x+a)^2 - b^2)(x+a) + ((x-a)^2 - c^2)(x-a) = 2x^3 + (6a^2 - b^2 - c^2)x - a(b^2 - c^2)
  const double p = (6.0 * a * a - b * b - c * c) / 2.0;
  const double q = -a * (b * b - c * c) / 2.0;
  ThetaResult out;
  out.theta = std::numeric_limits<double>::infinity();
  const double scale = std::max({1.0, b * b, c * c});
  for (double x : depressed_cubic_roots(p, q)) {
    const double e1 = (x + a) * (x + a) - b * b;
    const double e2 = (x - a) * (x - a) - c * c;
    const double v = 0.25 * (e1 * e1 + e2 * e2);
    const bool in_d = std::abs(e1) <= 1e-9 * scale && std::abs(e2) <= 1e-9 * scale;
    out.roots.push_back(x);
    out.values.push_back(v);
    out.desired.push_back(in_d);
    if (!in_d) out.theta = std::min(out.theta, v);
  }
  if (!std::isfinite(out.theta)) throw std::runtime_error("vartheta_2d: no undesired critical configuration found");
  return out;
}

struct CriticalPoint {
  Vec position;
  double V = 0.0;
};

struct NumericThetaResult {
  double theta = 0.0;
  std::vector<CriticalPoint> points;
};

struct NumericThetaOptions {
  int starts = 64;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  /// Extra starting points, tried before the random ones.
  std::vector<Vec> initial_guesses;
};

/// Multi-start search for undesired equilibria of one follower with the given
/// neighbour positions (at their desired mutual distances). Works in R^2 and R^3.
inline NumericThetaResult vartheta_numeric(std::span<const Vec> neighbors, std::span<const double> desired,
                                           const NumericThetaOptions& opt = {}) {
  if (neighbors.empty() || neighbors.size() != desired.size())
    throw std::invalid_argument("vartheta_numeric: neighbour and distance lists must match");
  const auto d = neighbors.front().size();
  const double dmax = *std::max_element(desired.begin(), desired.end());
  Vec centroid = Vec::Zero(d);
  for (const auto& p : neighbors) centroid += p;
  centroid /= static_cast<double>(neighbors.size());

  auto evaluate = [&](const Vec& x, Vec& z, Mat& jac, Vec& e) {
    const auto m = static_cast<Eigen::Index>(neighbors.size());
    e.resize(m);
    z = Vec::Zero(d);
    jac = Mat::Zero(d, d);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Vec pk = neighbors[k] - x;
      e[k] = pk.squaredNorm() - desired[k] * desired[k];
      z -= e[k] * pk;
      jac += 2.0 * pk * pk.transpose() + e[k] * Mat::Identity(d, d);
    }
  };

  const double z_tol = 1e-10 * std::max(1.0, dmax * dmax * dmax);
  const double e_tol = 1e-6 * std::max(1.0, dmax * dmax);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NumericThetaResult out;
  out.theta = std::numeric_limits<double>::infinity();
  const int guesses = static_cast<int>(opt.initial_guesses.size());
  for (int s = 0; s < guesses + opt.starts; ++s) {
    Vec x;
    if (s < guesses) {
      x = opt.initial_guesses[static_cast<std::size_t>(s)];
      if (x.size() != d) throw std::invalid_argument("vartheta_numeric: initial guess has the wrong dimension");
    } else {
      Vec dir(d);
      for (Eigen::Index k = 0; k < d; ++k) dir[k] = gauss(rng);
      const double r = 2.0 * dmax * std::pow(unit(rng), 1.0 / static_cast<double>(d));
      x = centroid + r * dir.normalized();
    }

    // Levenberg-Marquardt on z(x) = 0.
    Vec z, e;
    Mat jac;
    evaluate(x, z, jac, e);
    double cost = z.squaredNorm();
    double mu = 1e-3 * std::max(1.0, (jac.transpose() * jac).diagonal().maxCoeff());
    for (int it = 0; it < opt.max_iterations && z.norm() > z_tol; ++it) {
      const Mat jtj = jac.transpose() * jac;
      const Vec g = jac.transpose() * z;
      const Vec step = (jtj + mu * Mat::Identity(d, d)).ldlt().solve(-g);
      Vec zn, en;
      Mat jn;
      const Vec xn = x + step;
      evaluate(xn, zn, jn, en);
      if (zn.squaredNorm() < cost) {
        x = xn;
        z = zn;
        e = en;
        jac = jn;
        cost = z.squaredNorm();
        mu = std::max(mu / 4.0, 1e-15);
      } else {
        mu *= 4.0;
        if (mu > 1e20) break;
      }
    }
    if (z.norm() > z_tol || e.norm() <= e_tol) continue;
    const bool duplicate = std::any_of(out.points.begin(), out.points.end(),
                                       [&](const CriticalPoint& c) { return (c.position - x).norm() <= 1e-6; });
    if (duplicate) continue;
    const double v = lyapunov_V(e);
    out.points.push_back({x, v});
    out.theta = std::min(out.theta, v);
  }
  if (out.points.empty()) throw std::runtime_error("vartheta_numeric: no undesired critical point found");
  return out;
}

/// Lower bound on the smallest eigenvalue of P^T P inside {V <= eps_V}, times 4.
inline double sigma_lower_bound(const Mat& p_star, double eps_v, double xi) {
  if (p_star.rows() != p_star.cols()) throw std::invalid_argument("sigma_lower_bound: P* must be square");
  const double det2 = std::pow(p_star.determinant(), 2);
  if (!(det2 > 0.0)) throw std::invalid_argument("sigma_lower_bound: P* is singular");
  if (!(xi > 0.0 && xi < det2)) throw std::invalid_argument("sigma_lower_bound: xi must lie in (0, det^2(P*))");
  if (!(eps_v >= 0.0)) throw std::invalid_argument("sigma_lower_bound: eps_V must be >= 0");
  const double d = static_cast<double>(p_star.rows());
  const double zeta = det2 - xi;
  const double denom = std::pow(std::sqrt(4.0 * d * eps_v) + p_star.squaredNorm(), d - 1.0);
  return 4.0 * zeta * std::pow(d - 1.0, d - 1.0) / denom;
}

/// T = T1 + V(T1)^(1-c) / (lambda (1-c)).
inline double finite_time_bound(double v_t1, double t1, double lambda, double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("finite_time_bound: c must lie in (0,1)");
  if (!(lambda > 0.0)) throw std::invalid_argument("finite_time_bound: lambda must be > 0");
  if (!(v_t1 >= 0.0)) throw std::invalid_argument("finite_time_bound: V(T1) must be >= 0");
  return t1 + std::pow(v_t1, 1.0 - c) / (lambda * (1.0 - c));
}

/// Decay rate k sigma^((alpha+1)/2) paired with exponent (alpha+1)/2.
inline double finite_time_rate(double k, double sigma, double alpha) { return k * std::pow(sigma, (alpha + 1.0) / 2.0); }

inline bool check_basin(double v0, double theta) { return v0 < theta; }

}  // namespace ftform

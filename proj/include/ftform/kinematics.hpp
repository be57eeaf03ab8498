#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ftform/types.hpp"

namespace ftform {

/// Proper rotation taking local coordinates of an agent frame to the global
/// frame. Columns are the local axes expressed globally.
class FrameRotation {
 public:
  static constexpr double kTolerance = 1e-12;

  FrameRotation() : r_(Mat::Identity(2, 2)) {}

  explicit FrameRotation(const Mat& r) : r_(r) {
    if (r.rows() != r.cols() || r.rows() < 2 || r.rows() > kMaxDim)
      throw std::invalid_argument("rotation must be 2x2 or 3x3");
    const double orth = (r.transpose() * r - Mat::Identity(r.rows(), r.rows())).cwiseAbs().maxCoeff();
    if (orth > kTolerance) throw std::invalid_argument("rotation is not orthogonal");
    if (std::abs(r.determinant() - 1.0) > kTolerance)
      throw std::invalid_argument("rotation determinant is not +1");
  }

  static FrameRotation identity(int d) { return FrameRotation(Mat::Identity(d, d)); }

  static FrameRotation planar(double angle) {
    Mat r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return FrameRotation(r);
  }

  int dim() const { return static_cast<int>(r_.rows()); }
  const Mat& matrix() const { return r_; }

  Vec to_local(const Vec& global) const { return r_.transpose() * global; }
  Vec to_global(const Vec& local) const { return r_ * local; }

 private:
  Mat r_;
};

enum class Role { leader, follower };

struct AgentState {
  int id = 0;
  Vec position;
  Role role = Role::follower;
  /// Leaders know the global frame and keep the identity.
  FrameRotation frame;
};

/// p_ji expressed in agent i's frame: R_i^T (p_j - p_i).
inline Vec local_displacement(const Vec& pj, const Vec& pi, const FrameRotation& ri) {
  if (pj.size() != pi.size() || pi.size() != ri.dim())
    throw std::invalid_argument("local_displacement: dimension mismatch");
  return ri.to_local(pj - pi);
}

/// Power signum u / ||u||^(1 - alpha), continued by 0 at the origin.
/// Any alpha > 0 is accepted so the same routine serves the beta = 2 - alpha term.
inline Vec sgn_alpha(const Vec& u, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sgn_alpha: exponent must be positive");
  const double n = u.norm();
  if (n == 0.0) return Vec::Zero(u.size());
  return u / std::pow(n, 1.0 - alpha);
}

/// Componentwise signum; eps > 0 switches to the boundary layer x / (|x| + eps).
inline Vec sgn_elementwise(const Vec& u, double eps) {
  Vec out(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double x = u[k];
    if (eps > 0.0)
      out[k] = x / (std::abs(x) + eps);
    else
      out[k] = static_cast<double>((x > 0.0) - (x < 0.0));
  }
  return out;
}

/// Haar-distributed rotation drawn from `rng`.
template <class Engine>
FrameRotation random_rotation(Engine& rng, int d) {
  if (d == 2) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    return FrameRotation::planar(angle(rng));
  }
  if (d != 3) throw std::invalid_argument("random_rotation: d must be 2 or 3");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3d g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 3; ++c)
    if (rr(c, c) < 0.0) q.col(c) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  // Re-orthonormalise once so the 1e-12 invariant holds with margin.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  q = svd.matrixU() * svd.matrixV().transpose();
  return FrameRotation(Mat(q));
}

inline FrameRotation random_rotation(std::uint64_t seed, int d) {
  std::mt19937_64 rng(seed);
  return random_rotation(rng, d);
}

}  // namespace ftform

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ftform {

inline constexpr int kMaxDim = 3;

/// Point or direction in R^d, d <= 3. Inline storage, no heap traffic.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// vec(p_1, ..., p_n): all agent coordinates stacked, agent-major.
using Stacked = Eigen::VectorXd;

/// Raised when a configuration violates one of the standing assumptions
/// (1: graph/rigidity, 2: desired distances, 3: leaders and initial state).
/// `assumption() == 0` means a plain field error.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, int assumption = 0)
      : std::invalid_argument(assumption > 0
                                  ? "Assumption " + std::to_string(assumption) + ": " + what
                                  : what),
        assumption_(assumption) {}

  int assumption() const noexcept { return assumption_; }

 private:
  int assumption_;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

inline Vec block(const Stacked& s, int agent, int d) { return s.segment(agent * d, d); }

}  // namespace ftform

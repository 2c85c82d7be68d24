#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace marten {

using Matrix3 = Eigen::Matrix3d;
using Matrix32 = Eigen::Matrix<double, 3, 2>;
using Vector3 = Eigen::Vector3d;
using Vector2 = Eigen::Vector2d;

/// Raised when an operation receives arguments outside its contract.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a numerical procedure meets a non-finite value.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

inline double frob(const Matrix3& m) { return m.norm(); }

}  // namespace marten

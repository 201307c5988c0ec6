#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace penreg {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using IndexList = std::vector<Index>;

// Error taxonomy. The CLI maps each to a distinct exit code.

/// Invalid user-supplied configuration (names, ranges, missing options).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (non-finite iterates, singular systems).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace penreg

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gpdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Precondition or dimension violation (caller bug or bad input file).
class ContractError : public std::runtime_error {
public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration value or unparseable file.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested combination is unsupported by construction
/// (e.g. GIP kernel for direct forward-dynamics learning).
class UnsupportedError : public std::runtime_error {
public:
  explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (factorization breakdown, optimization failure).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

inline void require_finite(const Vec& v, const std::string& what) {
  if (!v.allFinite()) throw ContractError(what + " contains non-finite values");
}

}  // namespace gpdyn

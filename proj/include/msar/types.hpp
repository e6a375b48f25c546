#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace msar {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Invalid user-supplied configuration (bad ranges, inconsistent sizes).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a function precondition (length mismatch, index out of range).
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Filesystem failure, always carrying the offending path in the message.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace msar

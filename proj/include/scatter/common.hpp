// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_COMMON_HPP
#define SCATTER_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scatter {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr Complex I_UNIT{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

class ConvergenceError : public Error {
public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& what) : Error(what) {}
};

class SingularityError : public Error {
public:
  explicit SingularityError(const std::string& what) : Error(what) {}
};

inline double deg2rad(double deg) { return deg * PI / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / PI; }

}  // namespace scatter

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace ecsim {

/// Invalid or inconsistent scenario configuration (CLI exit code 2).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: degenerate input, integration failure, ... (CLI exit code 3).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Kernel evaluation requested at (numerically) coincident points.
class coincident_points_error : public numerical_error {
 public:
  explicit coincident_points_error(const std::string& msg) : numerical_error(msg) {}
};

}  // namespace ecsim

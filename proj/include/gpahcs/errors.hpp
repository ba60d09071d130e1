#pragma once

#include <stdexcept>
#include <string>

namespace gpahcs {

// Argument or parameter combination outside a function's domain.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative scheme exhausted its budget before reaching tolerance.
// Carries the best estimate available at the point of failure.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what, double partial = 0.0)
      : std::runtime_error(what), partial_estimate(partial) {}
  double partial_estimate;
};

// Truncated Fock-space operation without enough headroom.
class dimension_error : public std::runtime_error {
 public:
  explicit dimension_error(const std::string& what) : std::runtime_error(what) {}
};

// Two independent evaluation routes disagreed beyond tolerance.
class consistency_error : public std::runtime_error {
 public:
  explicit consistency_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpahcs

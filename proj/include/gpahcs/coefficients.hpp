#pragma once

#include <complex>
#include <vector>

namespace gpahcs {

// Truncated Fock-basis amplitude vector.  Index n refers to Fock label
// offset + n; the first `offset` number states carry no weight.
struct Coefficients {
  std::vector<std::complex<double>> amplitudes;
  int offset = 0;
  double tail_bound = 0.0;  // certified squared-norm share beyond truncation

  double norm_sq() const {
    double s = 0.0;
    for (const auto& c : amplitudes) s += std::norm(c);
    return s;
  }
};

}  // namespace gpahcs

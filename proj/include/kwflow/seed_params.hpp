#pragma once

#include <complex>
#include <vector>

namespace kwflow {

struct SeedParams {
  int m = 0;
  int p = 1;
  std::vector<std::complex<double>> a{1.0};  // a_1 .. a_p
  double delta = 0.05;

  int k() const { return m + 2 * p; }
  // Throws std::invalid_argument with a readable message.
  void validate(double delta_max = 0.1) const;
};

}  // namespace kwflow

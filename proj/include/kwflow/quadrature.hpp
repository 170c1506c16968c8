#pragma once

#include <functional>
#include <vector>

namespace kwflow {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// n-point Gauss-Legendre rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

// Composite rule: `panels` equal panels on [a, b], n points each.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int n = 64);

}  // namespace kwflow

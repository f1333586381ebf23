#pragma once

#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

// Adaptive Gauss-Kronrod integration split at the given kinks.
namespace oracle {

inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        const std::vector<double>& kinks = {}) {
  std::vector<double> cuts{lo};
  for (double k : kinks) {
    if (k > lo && k < hi) cuts.push_back(k);
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14);
  }
  return total;
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bcwe {

/// Independent generator for `stream` under a master seed. All randomness in
/// the library is derived this way so runs are reproducible from one seed.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform point of the scaled simplex {y >= 0, sum y = mass}.
template <typename Rng>
Eigen::VectorXd random_simplex_point(Rng& rng, Eigen::Index n, double mass = 1.0) {
  std::exponential_distribution<double> exp1(1.0);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = exp1(rng);
  return mass * y / y.sum();
}

}  // namespace bcwe

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/game.hpp"
#include "bcwe/polynomial.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(BCWE_TEST_DATA_DIR) + "/" + name; }

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline bcwe::CostCurve affine(double c0, double c1) { return bcwe::CostCurve({0.0, 1.0}, {{c0, c1}}); }

/// Two states, c_a = 1{high}, c_b = 2 y_b + 1/3.
inline bcwe::CongestionGame example1() {
  return bcwe::CongestionGame::singleton({"low", "high"}, vec({0.5, 0.5}), {"a", "b"},
                                         {{affine(0, 0), affine(1, 0)}, {affine(1.0 / 3, 2), affine(1.0 / 3, 2)}});
}

/// One state, c_a = 1, c_b = max(2 - 4 y_b, 4 y_b - 2).
inline bcwe::CongestionGame example2() {
  const bcwe::CostCurve vee({0.0, 0.5, 1.0}, {{2.0, -4.0}, {-2.0, 4.0}});
  return bcwe::CongestionGame::singleton({"only"}, vec({1.0}), {"a", "b"}, {{affine(1, 0)}, {vee}});
}

inline bcwe::FiniteOutcome example1_bcwe() {
  return bcwe::FiniteOutcome({{{bcwe::FlowProfile(vec({1, 0})), 1.0}},
                              {{bcwe::FlowProfile(vec({5.0 / 6, 1.0 / 6})), 1.0}}});
}

inline bcwe::FiniteOutcome example2_bcwe() {
  return bcwe::FiniteOutcome(
      {{{bcwe::FlowProfile(vec({1, 0})), 1.0 / 3}, {bcwe::FlowProfile(vec({0.5, 0.5})), 2.0 / 3}}});
}

}  // namespace fixtures

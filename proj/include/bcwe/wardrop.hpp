#pragma once

#include <cstddef>
#include <vector>

#include "bcwe/descent.hpp"
#include "bcwe/game.hpp"

namespace bcwe {

struct EquilibriumGapReport {
  struct Entry {
    std::size_t action;
    double cost;
    double min_cost;
    double slack;
  };
  Eigen::VectorXd costs;
  /// Only actions with flow above kSupportThreshold.
  std::vector<Entry> supported;
  double gap = 0.0;
  double tolerance = 0.0;
  bool certified = false;
};

/// Complete-information Wardrop check in one state: every used action must be
/// a cheapest action.
EquilibriumGapReport verify_wardrop(const CongestionGame& game, const FlowProfile& flow,
                                    std::size_t state, double tol);

struct WardropSolution {
  FlowProfile flow;
  GapSummary gaps;
  long iterations = 0;
  std::vector<double> potential_trace;
};

/// Potential minimization in one state. Requires the state's curves to be
/// nondecreasing (UNSUPPORTED_MODEL otherwise).
WardropSolution solve_wardrop(const CongestionGame& game, std::size_t state,
                              const DescentConfig& config = {});

/// Equilibrium of the prior-averaged game.
WardropSolution solve_average_wardrop(const CongestionGame& game, const DescentConfig& config = {});

}  // namespace bcwe

#include "bcwe/wardrop.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace bcwe {

EquilibriumGapReport verify_wardrop(const CongestionGame& game, const FlowProfile& flow,
                                    std::size_t state, double tol) {
  if (state >= game.num_states()) throw Error(ErrorCode::kLookup, "state index out of range");
  if (flow.size() != static_cast<Eigen::Index>(game.num_actions()) ||
      std::abs(flow.mass() - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::kDomain, "flow must be a unit-mass vector over the actions");
  }
  EquilibriumGapReport report;
  report.costs = action_costs(game, flow.entries(), state);
  report.tolerance = tol;
  const double best = report.costs.minCoeff();
  for (Eigen::Index a = 0; a < flow.size(); ++a) {
    if (flow[a] <= kSupportThreshold) continue;
    const double slack = report.costs(a) - best;
    report.supported.push_back({static_cast<std::size_t>(a), report.costs(a), best, slack});
    report.gap = std::max(report.gap, slack);
  }
  report.certified = report.gap <= tol;
  return report;
}

namespace {

WardropSolution solve_single_state(const CongestionGame& single, const DescentConfig& config) {
  if (classify_potential(single) == ConvexityClass::kNonConvex) {
    throw Error(ErrorCode::kUnsupportedModel,
                "potential is not convex (some cost curve decreases); equilibria are not minimizers");
  }
  BlockPotential potential(single, {1.0}, {PotentialTerm{0, 1.0, {0}}});
  DescentResult r = minimize_potential(potential, config);
  Eigen::VectorXd y = r.flows.col(0).cwiseMax(0.0);
  y /= y.sum();
  return WardropSolution{FlowProfile(std::move(y)), r.gaps, r.iterations, std::move(r.potential_trace)};
}

}  // namespace

WardropSolution solve_wardrop(const CongestionGame& game, std::size_t state,
                              const DescentConfig& config) {
  return solve_single_state(game.restricted_to_state(state), config);
}

WardropSolution solve_average_wardrop(const CongestionGame& game, const DescentConfig& config) {
  return solve_single_state(game.averaged(), config);
}

}  // namespace bcwe

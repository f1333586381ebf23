#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/game.hpp"
#include "bcwe/structure.hpp"

namespace bcwe {

/// Integer recommendation counts with sum K for every support flow.
struct RationalApproximation {
  int K = 1;
  std::vector<Eigen::VectorXd> flows;
  std::vector<std::vector<int>> counts;
  double eta_achieved = 0.0;

  /// counts[i] / K.
  Eigen::VectorXd rational_flow(std::size_t i) const;
};

/// Smallest K whose largest-remainder rounding of every K*y is within eta.
/// Flows whose entries are all exact rationals with common denominator
/// d <= 1e6 get K = d and eta_achieved = 0 regardless of eta; otherwise
/// eta <= 0 is a DOMAIN error.
RationalApproximation rational_approximation(const std::vector<Eigen::VectorXd>& flows, double eta);

/// Counts summing to K: floor(K y), plus one for the largest fractional
/// parts (lowest index first on ties).
std::vector<int> largest_remainder(const Eigen::Ref<const Eigen::VectorXd>& flow, int K);

/// Direct K-population structure recommending N(y_a) populations to a by
/// cyclic rotations. Every support flow of `bcwe` must appear in `approx`.
InformationStructure build_direct_structure(const CongestionGame& game, const FiniteOutcome& bcwe,
                                            const RationalApproximation& approx);

/// Every population-type plays its recommendation with full mass.
InterimFlowProfile obedient_profile(const InformationStructure& structure,
                                    const std::vector<std::string>& actions);

struct LipschitzEstimate {
  double L = 0.0;
  std::size_t sample_count = 0;
};

/// Values whose joint sup-norm modulus is estimated, at flow y in state s.
using FlowFunctional = std::function<Eigen::VectorXd(const Eigen::VectorXd& y, std::size_t state)>;

/// Empirical Lipschitz constant (w.r.t. the sup norm on flows) of the family
/// y_a c_b(y, s) over all (a, b, s). Uses `sample_count` Halton pairs, as many
/// close pairs, and all adjacent pairs of the D = 10 grid.
LipschitzEstimate estimate_modulus(const CongestionGame& game, std::size_t sample_count,
                                   std::uint64_t seed);

/// Same sampling for an arbitrary functional, e.g. the social cost.
LipschitzEstimate estimate_modulus(const CongestionGame& game, const FlowFunctional& f,
                                   std::size_t sample_count, std::uint64_t seed);

/// Smallest positive flow entry over the support of `bcwe`.
double smallest_positive_flow(const FiniteOutcome& bcwe);

/// 4 L eta / eps0 with eps0 the smallest positive support flow entry; 0 when
/// the approximation is exact. Requires eta <= eps0 / 2.
double epsilon_bound(const RationalApproximation& approx, const FiniteOutcome& bcwe,
                     const LipschitzEstimate& lip);

}  // namespace bcwe

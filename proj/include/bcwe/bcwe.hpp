#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/descent.hpp"
#include "bcwe/game.hpp"

namespace bcwe {

/// Obedience constraints of a Bayes correlated Wardrop equilibrium. For the
/// ordered pair (a, b):
///   lhs(a, b) = sum_s p(s) sum_y mu(y|s) y_a c_a(y, s)
///   rhs(a, b) = sum_s p(s) sum_y mu(y|s) y_a c_b(y, s)
/// and the outcome is obedient when lhs <= rhs for every pair.
struct ObedienceReport {
  Eigen::MatrixXd lhs;
  Eigen::MatrixXd rhs;
  Eigen::MatrixXd slack;  // rhs - lhs
  double violation = 0.0;
  double tolerance = 0.0;
  bool certified = false;
};

ObedienceReport verify_bcwe(const CongestionGame& game, const FiniteOutcome& outcome, double tol);

/// Point mass on the per-state Wardrop equilibrium.
FiniteOutcome fully_revealing_bcwe(const CongestionGame& game, const DescentConfig& config = {});

/// Point mass on the equilibrium of the prior-averaged game, in every state.
FiniteOutcome non_revealing_bcwe(const CongestionGame& game, const DescentConfig& config = {});

/// All flows with entries k/D, enumerated in lexicographic order of the
/// count vectors.
class FlowGrid {
 public:
  FlowGrid(int denominator, std::size_t num_actions);

  int denominator() const { return denominator_; }
  std::size_t size() const { return counts_.size(); }
  const std::vector<int>& counts(std::size_t i) const { return counts_[i]; }
  /// One column per grid point.
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }

 private:
  int denominator_;
  std::vector<std::vector<int>> counts_;
  Eigen::MatrixXd points_;
};

/// Designer objective psi(y, s), minimized.
struct BcweObjective {
  enum class Kind { kSocialCost, kNegSocialCost, kTable };
  Kind kind = Kind::kSocialCost;
  /// states x grid points; used when kind == kTable.
  Eigen::MatrixXd table;

  static BcweObjective social_cost() { return {Kind::kSocialCost, {}}; }
  static BcweObjective neg_social_cost() { return {Kind::kNegSocialCost, {}}; }
  static BcweObjective from_table(Eigen::MatrixXd table) { return {Kind::kTable, std::move(table)}; }
};

/// psi evaluated on the grid, states x points.
Eigen::MatrixXd objective_table(const CongestionGame& game, const BcweObjective& objective,
                                const FlowGrid& grid);

struct BcweOptimum {
  FiniteOutcome outcome;
  double value;
  long pivots;
};

/// Minimizes sum_s p(s) sum_y mu(y|s) psi(y, s) over grid-supported BCWE by
/// linear programming. Throws InfeasibleError when no grid-supported BCWE exists.
BcweOptimum optimize_bcwe(const CongestionGame& game, const BcweObjective& objective,
                          const FlowGrid& grid);

}  // namespace bcwe

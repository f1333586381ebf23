#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/descent.hpp"
#include "bcwe/game.hpp"
#include "bcwe/structure.hpp"

namespace bcwe {

/// Complete-information game whose populations are the (population, type)
/// pairs of (game, structure). Its potential terms are the weighted type
/// profiles p(s) pi(profile | s); block (k, t) has mass gamma^k.
class AuxiliaryGame {
 public:
  /// CONSISTENCY error when the structure's states differ from the game's.
  AuxiliaryGame(const CongestionGame& game, const InformationStructure& structure);

  const CongestionGame& game() const { return potential_.game(); }
  const InformationStructure& structure() const { return structure_; }
  const BlockPotential& potential() const { return potential_; }

  std::size_t num_population_types() const { return potential_.num_blocks(); }
  /// Type profiles carrying positive weight.
  std::size_t num_weighted_profiles() const { return potential_.terms().size(); }
  std::size_t block(std::size_t population, std::size_t type) const { return offset_[population] + type; }
  /// prob(t^k): total weight of the profiles where population k has type t.
  double type_probability(std::size_t population, std::size_t type) const {
    return potential_.block_weight(block(population, type));
  }

  /// Actions x population-types, one column per block.
  Eigen::MatrixXd to_matrix(const InterimFlowProfile& profile) const;
  InterimFlowProfile from_matrix(const Eigen::MatrixXd& flows) const;

 private:
  InformationStructure structure_;
  std::vector<std::size_t> offset_;
  BlockPotential potential_;
};

struct InterimCostReport {
  struct TypeEntry {
    std::size_t population;
    std::size_t type;
    double probability;
    /// prob <= 1e-12: no constraint applies and the entry is skipped.
    bool excluded;
    /// Conditional expected cost of every action (zero when excluded).
    Eigen::VectorXd conditional_costs;
    /// Largest cost of a supported action minus the cheapest cost.
    double max_slack;
  };
  std::vector<TypeEntry> types;
  /// Normalized epsilon: max slack over represented types.
  double epsilon = 0.0;
  /// Same maximum taken over prob * slack, the form used by the solver.
  double unnormalized_epsilon = 0.0;

  bool certified(double tol) const { return epsilon <= tol; }
};

InterimCostReport verify_eps_bwe(const AuxiliaryGame& aux, const InterimFlowProfile& profile);
InterimCostReport verify_eps_bwe(const CongestionGame& game, const InformationStructure& structure,
                                 const InterimFlowProfile& profile);

struct BweSolution {
  InterimFlowProfile profile;
  GapSummary gaps;
  long iterations = 0;
  double potential = 0.0;
};

/// Minimizes the auxiliary potential. Requires a convex potential
/// (UNSUPPORTED_MODEL otherwise); `start` overrides the configured start.
BweSolution solve_bwe(const AuxiliaryGame& aux, const DescentConfig& config,
                      std::optional<InterimFlowProfile> start = std::nullopt);
BweSolution solve_bwe(const CongestionGame& game, const InformationStructure& structure,
                      const DescentConfig& config = {});

/// Distribution of total flows per state; flows within 1e-9 are merged.
FiniteOutcome project_outcome(const AuxiliaryGame& aux, const InterimFlowProfile& profile);

struct TotalCostReport {
  /// sum over population-types and actions of y C (unnormalized interim costs).
  double total_cost;
  /// sum_s p(s) sum_profiles pi SC(y(profile), s).
  double expected_social_cost;
};

/// Both sides of the total-cost identity; INTERNAL error if they differ by more than 1e-9.
TotalCostReport total_cost(const AuxiliaryGame& aux, const InterimFlowProfile& profile);

}  // namespace bcwe

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/polynomial.hpp"

namespace bcwe {

/// Absolute tolerance for probability and flow sums.
inline constexpr double kMassTolerance = 1e-10;

/// Nonnegative vector over actions summing to `mass`.
class FlowProfile {
 public:
  explicit FlowProfile(Eigen::VectorXd entries, double mass = 1.0);

  double mass() const { return mass_; }
  const Eigen::VectorXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.size(); }
  double operator[](Eigen::Index a) const { return entries_(a); }

 private:
  Eigen::VectorXd entries_;
  double mass_;
};

struct OutcomeAtom {
  FlowProfile flow;
  double prob;
};

/// State-conditional distribution over finitely many unit-mass flows.
class FiniteOutcome {
 public:
  /// Validates per-state probabilities and pairwise distinct flows.
  explicit FiniteOutcome(std::vector<std::vector<OutcomeAtom>> per_state);

  /// Merges atoms whose flows are within `merge_tol` in sup norm and drops
  /// atoms with probability below `drop_below`; renormalizes each state.
  static FiniteOutcome merged(std::vector<std::vector<OutcomeAtom>> per_state,
                              double merge_tol = 1e-12, double drop_below = 0.0);

  std::size_t num_states() const { return per_state_.size(); }
  const std::vector<OutcomeAtom>& atoms(std::size_t state) const { return per_state_.at(state); }
  const std::vector<std::vector<OutcomeAtom>>& per_state() const { return per_state_; }

  /// Distinct flows over all states (first-seen order).
  std::vector<Eigen::VectorXd> support() const;

 private:
  std::vector<std::vector<OutcomeAtom>> per_state_;
};

enum class ConvexityClass { kNonConvex, kConvex, kStrictlyConvexOnSimplex };

std::string_view to_string(ConvexityClass c);

struct Action {
  std::string label;
  std::vector<std::size_t> resources;
};

/// Symmetric Bayesian nonatomic congestion game with piecewise-polynomial
/// resource costs. Immutable after construction.
class CongestionGame {
 public:
  /// `curves[e][s]` is the cost of resource e in state s.
  CongestionGame(std::vector<std::string> states, Eigen::VectorXd prior,
                 std::vector<std::string> resources, std::vector<Action> actions,
                 std::vector<std::vector<CostCurve>> curves);

  /// Singleton-action game: one resource per action, resource label = action label.
  static CongestionGame singleton(std::vector<std::string> states, Eigen::VectorXd prior,
                                  std::vector<std::string> actions,
                                  std::vector<std::vector<CostCurve>> curves);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_resources() const { return resources_.size(); }
  std::size_t num_actions() const { return actions_.size(); }

  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& resources() const { return resources_; }
  const std::vector<Action>& actions() const { return actions_; }
  const Eigen::VectorXd& prior() const { return prior_; }
  const std::string& action_label(std::size_t a) const { return actions_.at(a).label; }
  std::vector<std::string> action_labels() const;

  std::size_t state_index(std::string_view label) const;
  std::size_t action_index(std::string_view label) const;
  std::size_t resource_index(std::string_view label) const;

  const CostCurve& curve(std::size_t resource, std::size_t state) const {
    return curves_.at(resource).at(state);
  }
  const std::vector<std::vector<CostCurve>>& curves() const { return curves_; }

  /// Resource-by-action 0/1 matrix; loads are incidence() * y.
  const Eigen::MatrixXd& incidence() const { return incidence_; }

  /// Complete-information game of a single state (prior 1).
  CongestionGame restricted_to_state(std::size_t state) const;

  /// Single-state game whose curves are prior-weighted averages.
  CongestionGame averaged() const;

 private:
  std::vector<std::string> states_;
  Eigen::VectorXd prior_;
  std::vector<std::string> resources_;
  std::vector<Action> actions_;
  std::vector<std::vector<CostCurve>> curves_;
  Eigen::MatrixXd incidence_;
};

// Unchecked evaluations. They accept any vector over actions, including points
// slightly off the simplex, and are the building blocks for the solvers.

Eigen::VectorXd loads(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y);
Eigen::VectorXd action_costs(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                             std::size_t state);
double potential(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                 std::size_t state);
double social_cost_at(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                      std::size_t state);

// Checked evaluations on unit-mass flows.

double action_cost(const CongestionGame& game, std::size_t action, const FlowProfile& flow,
                   std::size_t state);
double action_cost(const CongestionGame& game, std::string_view action, const FlowProfile& flow,
                   std::string_view state);
double social_cost(const CongestionGame& game, const FlowProfile& flow, std::size_t state);
double potential_value(const CongestionGame& game, const FlowProfile& flow, std::size_t state);

/// Nondecreasing curves give a convex potential; singleton actions in
/// bijection with resources and strictly increasing curves give a strictly
/// convex one. Anything else is reported as non-convex.
ConvexityClass classify_potential(const CongestionGame& game);

/// Expected social cost of an outcome, sum_s p(s) sum_y mu(y|s) SC(y, s).
double expected_social_cost(const CongestionGame& game, const FiniteOutcome& outcome);

}  // namespace bcwe

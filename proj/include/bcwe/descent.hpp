#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/game.hpp"

namespace bcwe {

enum class StepRule {
  /// Mass transfer from the costliest supported action to the cheapest one,
  /// block by block, with exact line search on the potential.
  kPairwiseLineSearch,
  /// Classical conditional gradient with the open-loop step 2/(t+2).
  kOpenLoop,
};

struct DescentConfig {
  double target_gap = 1e-8;
  long max_iters = 100000;
  std::uint64_t seed = 0;
  /// Start from a random interior point drawn from `seed` instead of the
  /// cheapest vertex at the uniform profile.
  bool random_start = false;
  StepRule step_rule = StepRule::kPairwiseLineSearch;
  bool record_trace = false;
};

/// Flows below this are treated as unused when checking equilibrium slack.
inline constexpr double kSupportThreshold = 1e-9;

/// One weighted scenario of a block potential: in `state` the total flow is
/// the sum of the columns listed in `blocks`.
struct PotentialTerm {
  std::size_t state;
  double weight;
  std::vector<std::size_t> blocks;
};

/// Potential  sum_j w_j Phi_{s_j}( sum_{b in blocks_j} Y.col(b) )  over a
/// product of scaled simplices, one column of Y per block. Its gradient with
/// respect to Y(a, b) is the weighted cost C_a^b, which makes block
/// equilibria exactly the minimizers when every Phi_s is convex.
class BlockPotential {
 public:
  BlockPotential(CongestionGame game, std::vector<double> block_mass, std::vector<PotentialTerm> terms);

  const CongestionGame& game() const { return game_; }
  std::size_t num_blocks() const { return block_mass_.size(); }
  Eigen::Index num_actions() const { return static_cast<Eigen::Index>(game_.num_actions()); }
  double block_mass(std::size_t b) const { return block_mass_[b]; }
  /// Total weight of the terms that involve block b (the type probability).
  double block_weight(std::size_t b) const { return block_weight_[b]; }
  bool active(std::size_t b) const { return block_weight_[b] > 1e-12; }
  const std::vector<PotentialTerm>& terms() const { return terms_; }
  const std::vector<std::size_t>& terms_of(std::size_t b) const { return terms_of_[b]; }

  /// Total flow of every term, one column per term.
  Eigen::MatrixXd totals(const Eigen::MatrixXd& flows) const;
  /// Unnormalized block costs C_a^b, one column per block.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& flows) const;
  double value(const Eigen::MatrixXd& flows) const;

  Eigen::MatrixXd uniform_flows() const;
  /// Validates shape, nonnegativity and per-block mass.
  void check_flows(const Eigen::MatrixXd& flows) const;

 private:
  CongestionGame game_;
  std::vector<double> block_mass_;
  std::vector<PotentialTerm> terms_;
  std::vector<double> block_weight_;
  std::vector<std::vector<std::size_t>> terms_of_;
};

struct GapSummary {
  /// Conditional-gradient gap  sum_b <C^b, y^b - s^b>, an upper bound on the
  /// potential suboptimality.
  double duality_gap = 0.0;
  /// Largest C_a^b - min_c C_c^b over active blocks and supported a.
  double max_slack = 0.0;
  double gap() const { return duality_gap > max_slack ? duality_gap : max_slack; }
};

GapSummary gap_summary(const BlockPotential& potential, const Eigen::MatrixXd& flows,
                       const Eigen::MatrixXd& gradient);

struct DescentResult {
  Eigen::MatrixXd flows;
  GapSummary gaps;
  long iterations = 0;
  double potential = 0.0;
  std::vector<double> potential_trace;
};

/// Minimizes the block potential until gap() <= config.target_gap. Inactive
/// blocks (zero weight) are held at the uniform split.
/// Throws ConvergenceError carrying the best gap when max_iters is reached.
DescentResult minimize_potential(const BlockPotential& potential, const DescentConfig& config,
                                 std::optional<Eigen::MatrixXd> start = std::nullopt);

}  // namespace bcwe

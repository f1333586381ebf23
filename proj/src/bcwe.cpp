#include "bcwe/bcwe.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bcwe/simplex_lp.hpp"
#include "bcwe/wardrop.hpp"

namespace bcwe {

ObedienceReport verify_bcwe(const CongestionGame& game, const FiniteOutcome& outcome, double tol) {
  if (outcome.num_states() != game.num_states()) {
    throw Error(ErrorCode::kConsistency, "outcome has " + std::to_string(outcome.num_states()) +
                                             " states, game has " + std::to_string(game.num_states()));
  }
  const auto n = static_cast<Eigen::Index>(game.num_actions());
  ObedienceReport r;
  r.lhs = Eigen::MatrixXd::Zero(n, n);
  r.rhs = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    const double ps = game.prior()(static_cast<Eigen::Index>(s));
    for (const auto& atom : outcome.atoms(s)) {
      if (atom.flow.size() != n) throw Error(ErrorCode::kConsistency, "outcome flow dimension mismatch");
      const Eigen::VectorXd& y = atom.flow.entries();
      const Eigen::VectorXd c = action_costs(game, y, s);
      // rhs(a, b) accumulates y_a c_b; lhs is its diagonal broadcast.
      const Eigen::MatrixXd outer = (ps * atom.prob) * y * c.transpose();
      r.rhs += outer;
      r.lhs += outer.diagonal().replicate(1, n);
    }
  }
  r.slack = r.rhs - r.lhs;
  r.violation = std::max(0.0, -r.slack.minCoeff());
  r.tolerance = tol;
  r.certified = r.violation <= tol;
  return r;
}

namespace {
void check_obedient(const CongestionGame& game, const FiniteOutcome& outcome, double tol) {
  const auto report = verify_bcwe(game, outcome, tol);
  if (!report.certified) {
    throw Error(ErrorCode::kInternal, "constructed outcome violates obedience by " +
                                          std::to_string(report.violation));
  }
}
}  // namespace

FiniteOutcome fully_revealing_bcwe(const CongestionGame& game, const DescentConfig& config) {
  std::vector<std::vector<OutcomeAtom>> per_state;
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    per_state.push_back({OutcomeAtom{solve_wardrop(game, s, config).flow, 1.0}});
  }
  FiniteOutcome outcome(std::move(per_state));
  check_obedient(game, outcome, 10.0 * config.target_gap);
  return outcome;
}

FiniteOutcome non_revealing_bcwe(const CongestionGame& game, const DescentConfig& config) {
  const FlowProfile flow = solve_average_wardrop(game, config).flow;
  std::vector<std::vector<OutcomeAtom>> per_state(game.num_states(), {OutcomeAtom{flow, 1.0}});
  FiniteOutcome outcome(std::move(per_state));
  check_obedient(game, outcome, 10.0 * config.target_gap);
  return outcome;
}

FlowGrid::FlowGrid(int denominator, std::size_t num_actions) : denominator_(denominator) {
  if (denominator < 1) throw Error(ErrorCode::kDomain, "grid denominator must be >= 1");
  if (num_actions < 1) throw Error(ErrorCode::kDomain, "grid needs at least one action");
  // Lexicographic enumeration of compositions of D into num_actions parts.
  const auto n = static_cast<std::ptrdiff_t>(num_actions);
  std::vector<int> k(num_actions, 0);
  k.back() = denominator;
  for (;;) {
    counts_.push_back(k);
    // Successor: bump the rightmost position that has mass to its right and
    // move the remaining tail mass (minus one) to the last position.
    int tail = 0;
    std::ptrdiff_t pos = -1;
    for (std::ptrdiff_t j = n - 1; j >= 1; --j) {
      tail += k[static_cast<std::size_t>(j)];
      if (tail > 0) {
        pos = j - 1;
        break;
      }
    }
    if (pos < 0) break;
    ++k[static_cast<std::size_t>(pos)];
    for (std::ptrdiff_t j = pos + 1; j < n; ++j) k[static_cast<std::size_t>(j)] = 0;
    k.back() = tail - 1;
  }
  points_.resize(static_cast<Eigen::Index>(num_actions), static_cast<Eigen::Index>(counts_.size()));
  for (std::size_t p = 0; p < counts_.size(); ++p) {
    for (std::size_t a = 0; a < num_actions; ++a) {
      points_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(p)) =
          static_cast<double>(counts_[p][a]) / static_cast<double>(denominator);
    }
  }
}

Eigen::MatrixXd objective_table(const CongestionGame& game, const BcweObjective& objective,
                                const FlowGrid& grid) {
  const auto states = static_cast<Eigen::Index>(game.num_states());
  const auto points = static_cast<Eigen::Index>(grid.size());
  if (objective.kind == BcweObjective::Kind::kTable) {
    if (objective.table.rows() != states || objective.table.cols() != points) {
      throw Error(ErrorCode::kDomain, "objective table must be states x grid points");
    }
    return objective.table;
  }
  const double sign = objective.kind == BcweObjective::Kind::kNegSocialCost ? -1.0 : 1.0;
  Eigen::MatrixXd psi(states, points);
  for (Eigen::Index s = 0; s < states; ++s) {
    for (Eigen::Index g = 0; g < points; ++g) {
      psi(s, g) = sign * social_cost_at(game, grid.points().col(g), static_cast<std::size_t>(s));
    }
  }
  return psi;
}

BcweOptimum optimize_bcwe(const CongestionGame& game, const BcweObjective& objective,
                          const FlowGrid& grid) {
  if (grid.points().rows() != static_cast<Eigen::Index>(game.num_actions())) {
    throw Error(ErrorCode::kConsistency, "grid dimension differs from number of actions");
  }
  const auto states = static_cast<Eigen::Index>(game.num_states());
  const auto points = static_cast<Eigen::Index>(grid.size());
  const auto actions = static_cast<Eigen::Index>(game.num_actions());
  const Eigen::MatrixXd psi = objective_table(game, objective, grid);

  // Grid constants: costs(s)(:, g) = c(y_g, s).
  std::vector<Eigen::MatrixXd> costs(static_cast<std::size_t>(states));
  for (Eigen::Index s = 0; s < states; ++s) {
    auto& cs = costs[static_cast<std::size_t>(s)];
    cs.resize(actions, points);
    for (Eigen::Index g = 0; g < points; ++g) {
      cs.col(g) = action_costs(game, grid.points().col(g), static_cast<std::size_t>(s));
    }
  }

  LinearProgram<double> lp;
  const Eigen::Index vars = states * points;
  lp.c.resize(vars);
  lp.a_eq = Eigen::MatrixXd::Zero(states, vars);
  lp.b_eq = Eigen::VectorXd::Ones(states);
  lp.a_le = Eigen::MatrixXd::Zero(actions * (actions - 1), vars);
  lp.b_le = Eigen::VectorXd::Zero(actions * (actions - 1));
  for (Eigen::Index s = 0; s < states; ++s) {
    const double ps = game.prior()(s);
    const auto& cs = costs[static_cast<std::size_t>(s)];
    for (Eigen::Index g = 0; g < points; ++g) {
      const Eigen::Index v = s * points + g;
      lp.c(v) = ps * psi(s, g);
      lp.a_eq(s, v) = 1.0;
      Eigen::Index row = 0;
      for (Eigen::Index a = 0; a < actions; ++a) {
        for (Eigen::Index b = 0; b < actions; ++b) {
          if (a == b) continue;
          lp.a_le(row++, v) = ps * grid.points()(a, g) * (cs(a, g) - cs(b, g));
        }
      }
    }
  }

  const LpSolution<double> sol = solve_lp(lp);

  std::vector<std::vector<OutcomeAtom>> per_state(static_cast<std::size_t>(states));
  for (Eigen::Index s = 0; s < states; ++s) {
    for (Eigen::Index g = 0; g < points; ++g) {
      const double w = sol.x(s * points + g);
      if (w < 1e-12) continue;
      per_state[static_cast<std::size_t>(s)].push_back({FlowProfile(grid.point(static_cast<std::size_t>(g))), w});
    }
  }
  FiniteOutcome outcome = FiniteOutcome::merged(std::move(per_state));
  check_obedient(game, outcome, 1e-8);

  double value = 0.0;
  for (Eigen::Index s = 0; s < states; ++s) {
    for (const auto& atom : outcome.atoms(static_cast<std::size_t>(s))) {
      Eigen::Index g = 0;
      while ((grid.points().col(g) - atom.flow.entries()).cwiseAbs().maxCoeff() > 1e-12) ++g;
      value += game.prior()(s) * atom.prob * psi(s, g);
    }
  }
  return BcweOptimum{std::move(outcome), value, sol.pivots};
}

}  // namespace bcwe

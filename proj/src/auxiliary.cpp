#include "bcwe/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bcwe/errors.hpp"

namespace bcwe {

namespace {

std::vector<std::size_t> block_offsets(const InformationStructure& structure) {
  std::vector<std::size_t> offset(structure.num_populations() + 1, 0);
  for (std::size_t k = 0; k < structure.num_populations(); ++k) {
    offset[k + 1] = offset[k] + structure.type_sets()[k].size();
  }
  return offset;
}

BlockPotential auxiliary_potential(const CongestionGame& game, const InformationStructure& structure,
                                   const std::vector<std::size_t>& offset) {
  if (structure.states().size() != game.num_states()) {
    throw Error(ErrorCode::kConsistency, "structure has " + std::to_string(structure.states().size()) +
                                             " states, game has " + std::to_string(game.num_states()));
  }
  std::vector<double> mass;
  for (std::size_t k = 0; k < structure.num_populations(); ++k) {
    mass.insert(mass.end(), structure.type_sets()[k].size(), structure.population_sizes()[k]);
  }
  std::vector<PotentialTerm> terms;
  for (std::size_t si = 0; si < structure.states().size(); ++si) {
    const std::string& label = structure.states()[si];
    const auto it = std::find(game.states().begin(), game.states().end(), label);
    if (it == game.states().end()) {
      throw Error(ErrorCode::kConsistency, "structure state '" + label + "' is not a game state");
    }
    const auto s = static_cast<std::size_t>(it - game.states().begin());
    const double ps = game.prior()(static_cast<Eigen::Index>(s));
    for (const auto& atom : structure.signal_law(si)) {
      if (atom.prob <= 0.0) continue;
      PotentialTerm term{s, ps * atom.prob, {}};
      term.blocks.reserve(atom.profile.size());
      for (std::size_t k = 0; k < atom.profile.size(); ++k) term.blocks.push_back(offset[k] + atom.profile[k]);
      terms.push_back(std::move(term));
    }
  }
  return BlockPotential(game, std::move(mass), std::move(terms));
}

}  // namespace

AuxiliaryGame::AuxiliaryGame(const CongestionGame& game, const InformationStructure& structure)
    : structure_(structure),
      offset_(block_offsets(structure)),
      potential_(auxiliary_potential(game, structure, offset_)) {}

Eigen::MatrixXd AuxiliaryGame::to_matrix(const InterimFlowProfile& profile) const {
  const auto n = potential_.num_actions();
  if (profile.flows.size() != structure_.num_populations()) {
    throw Error(ErrorCode::kConsistency, "interim profile has " + std::to_string(profile.flows.size()) +
                                             " populations, structure has " +
                                             std::to_string(structure_.num_populations()));
  }
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(num_population_types()));
  for (std::size_t k = 0; k < profile.flows.size(); ++k) {
    if (profile.flows[k].size() != structure_.type_sets()[k].size()) {
      throw Error(ErrorCode::kConsistency, "population " + std::to_string(k) + " has the wrong number of types");
    }
    for (std::size_t t = 0; t < profile.flows[k].size(); ++t) {
      if (profile.flows[k][t].size() != n) {
        throw Error(ErrorCode::kConsistency, "interim flow dimension differs from number of actions");
      }
      y.col(static_cast<Eigen::Index>(block(k, t))) = profile.flows[k][t];
    }
  }
  potential_.check_flows(y);
  return y;
}

InterimFlowProfile AuxiliaryGame::from_matrix(const Eigen::MatrixXd& flows) const {
  InterimFlowProfile profile;
  for (std::size_t k = 0; k < structure_.num_populations(); ++k) {
    auto& types = profile.flows.emplace_back();
    for (std::size_t t = 0; t < structure_.type_sets()[k].size(); ++t) {
      types.push_back(flows.col(static_cast<Eigen::Index>(block(k, t))));
    }
  }
  return profile;
}

InterimCostReport verify_eps_bwe(const AuxiliaryGame& aux, const InterimFlowProfile& profile) {
  const Eigen::MatrixXd y = aux.to_matrix(profile);
  const Eigen::MatrixXd g = aux.potential().gradient(y);
  InterimCostReport report;
  const auto& types = aux.structure().type_sets();
  for (std::size_t k = 0; k < types.size(); ++k) {
    for (std::size_t t = 0; t < types[k].size(); ++t) {
      const auto col = static_cast<Eigen::Index>(aux.block(k, t));
      InterimCostReport::TypeEntry e{k, t, aux.type_probability(k, t), false,
                                     Eigen::VectorXd::Zero(y.rows()), 0.0};
      e.excluded = e.probability <= 1e-12;
      if (!e.excluded) {
        e.conditional_costs = g.col(col) / e.probability;
        const double best = e.conditional_costs.minCoeff();
        for (Eigen::Index a = 0; a < y.rows(); ++a) {
          if (y(a, col) > kSupportThreshold) e.max_slack = std::max(e.max_slack, e.conditional_costs(a) - best);
        }
        report.epsilon = std::max(report.epsilon, e.max_slack);
        report.unnormalized_epsilon = std::max(report.unnormalized_epsilon, e.probability * e.max_slack);
      }
      report.types.push_back(std::move(e));
    }
  }
  return report;
}

InterimCostReport verify_eps_bwe(const CongestionGame& game, const InformationStructure& structure,
                                 const InterimFlowProfile& profile) {
  return verify_eps_bwe(AuxiliaryGame(game, structure), profile);
}

BweSolution solve_bwe(const AuxiliaryGame& aux, const DescentConfig& config,
                      std::optional<InterimFlowProfile> start) {
  if (classify_potential(aux.game()) == ConvexityClass::kNonConvex) {
    throw Error(ErrorCode::kUnsupportedModel, "potential is not convex; equilibria cannot be computed by minimization");
  }
  std::optional<Eigen::MatrixXd> y0;
  if (start) y0 = aux.to_matrix(*start);
  DescentResult r = minimize_potential(aux.potential(), config, std::move(y0));
  return BweSolution{aux.from_matrix(r.flows), r.gaps, r.iterations, r.potential};
}

BweSolution solve_bwe(const CongestionGame& game, const InformationStructure& structure,
                      const DescentConfig& config) {
  return solve_bwe(AuxiliaryGame(game, structure), config);
}

FiniteOutcome project_outcome(const AuxiliaryGame& aux, const InterimFlowProfile& profile) {
  const Eigen::MatrixXd y = aux.to_matrix(profile);
  const Eigen::MatrixXd totals = aux.potential().totals(y);
  const auto& game = aux.game();
  std::vector<std::vector<OutcomeAtom>> per_state(game.num_states());
  const auto& terms = aux.potential().terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double ps = game.prior()(static_cast<Eigen::Index>(terms[j].state));
    per_state[terms[j].state].push_back(
        {FlowProfile(totals.col(static_cast<Eigen::Index>(j))), terms[j].weight / ps});
  }
  return FiniteOutcome::merged(std::move(per_state), 1e-9);
}

TotalCostReport total_cost(const AuxiliaryGame& aux, const InterimFlowProfile& profile) {
  const Eigen::MatrixXd y = aux.to_matrix(profile);
  const Eigen::MatrixXd g = aux.potential().gradient(y);
  const Eigen::MatrixXd totals = aux.potential().totals(y);
  TotalCostReport r{y.cwiseProduct(g).sum(), 0.0};
  const auto& terms = aux.potential().terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    r.expected_social_cost +=
        terms[j].weight * social_cost_at(aux.game(), totals.col(static_cast<Eigen::Index>(j)), terms[j].state);
  }
  if (std::abs(r.total_cost - r.expected_social_cost) > 1e-9 * std::max(1.0, std::abs(r.expected_social_cost))) {
    throw Error(ErrorCode::kInternal, "total cost " + std::to_string(r.total_cost) +
                                          " differs from expected social cost " +
                                          std::to_string(r.expected_social_cost));
  }
  return r;
}

}  // namespace bcwe

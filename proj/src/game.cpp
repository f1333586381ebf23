#include "bcwe/game.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace bcwe {

FlowProfile::FlowProfile(Eigen::VectorXd entries, double mass)
    : entries_(std::move(entries)), mass_(mass) {
  if (!(mass_ >= 0.0)) throw Error(ErrorCode::kDomain, "flow mass must be nonnegative");
  if (entries_.size() == 0) throw Error(ErrorCode::kDomain, "flow has no entries");
  if (!entries_.allFinite() || entries_.minCoeff() < 0.0) {
    throw Error(ErrorCode::kDomain, "flow entries must be finite and nonnegative");
  }
  if (std::abs(entries_.sum() - mass_) > kMassTolerance) {
    throw Error(ErrorCode::kDomain, "flow entries sum to " + std::to_string(entries_.sum()) +
                                        ", expected " + std::to_string(mass_));
  }
}

FiniteOutcome::FiniteOutcome(std::vector<std::vector<OutcomeAtom>> per_state)
    : per_state_(std::move(per_state)) {
  for (std::size_t s = 0; s < per_state_.size(); ++s) {
    const auto& atoms = per_state_[s];
    if (atoms.empty()) throw Error(ErrorCode::kDomain, "state " + std::to_string(s) + " has no atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& atom = atoms[i];
      if (!(atom.prob >= 0.0)) throw Error(ErrorCode::kDomain, "negative outcome probability");
      if (std::abs(atom.flow.mass() - 1.0) > kMassTolerance) {
        throw Error(ErrorCode::kDomain, "outcome flows must have mass 1");
      }
      if (atom.flow.size() != atoms.front().flow.size()) {
        throw Error(ErrorCode::kDomain, "outcome flows have inconsistent dimension");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if ((atoms[j].flow.entries() - atom.flow.entries()).cwiseAbs().maxCoeff() <= 1e-12) {
          throw Error(ErrorCode::kDomain, "duplicate flow in state " + std::to_string(s));
        }
      }
      total += atom.prob;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw Error(ErrorCode::kDomain, "state " + std::to_string(s) + " probabilities sum to " +
                                          std::to_string(total));
    }
  }
}

FiniteOutcome FiniteOutcome::merged(std::vector<std::vector<OutcomeAtom>> per_state,
                                    double merge_tol, double drop_below) {
  std::vector<std::vector<OutcomeAtom>> out(per_state.size());
  for (std::size_t s = 0; s < per_state.size(); ++s) {
    auto& kept = out[s];
    for (auto& atom : per_state[s]) {
      auto it = std::find_if(kept.begin(), kept.end(), [&](const OutcomeAtom& k) {
        return (k.flow.entries() - atom.flow.entries()).cwiseAbs().maxCoeff() <= merge_tol;
      });
      if (it != kept.end()) {
        it->prob += atom.prob;
      } else {
        kept.push_back(std::move(atom));
      }
    }
    std::erase_if(kept, [&](const OutcomeAtom& a) { return a.prob < drop_below; });
    double total = 0.0;
    for (const auto& a : kept) total += a.prob;
    if (total > 0.0) {
      for (auto& a : kept) a.prob /= total;
    }
  }
  return FiniteOutcome(std::move(out));
}

std::vector<Eigen::VectorXd> FiniteOutcome::support() const {
  std::vector<Eigen::VectorXd> flows;
  for (const auto& atoms : per_state_) {
    for (const auto& atom : atoms) {
      const bool seen = std::any_of(flows.begin(), flows.end(), [&](const Eigen::VectorXd& f) {
        return (f - atom.flow.entries()).cwiseAbs().maxCoeff() <= 1e-12;
      });
      if (!seen) flows.push_back(atom.flow.entries());
    }
  }
  return flows;
}

std::string_view to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::kNonConvex: return "non_convex";
    case ConvexityClass::kConvex: return "convex";
    case ConvexityClass::kStrictlyConvexOnSimplex: return "strictly_convex_on_simplex";
  }
  return "non_convex";
}

CongestionGame::CongestionGame(std::vector<std::string> states, Eigen::VectorXd prior,
                               std::vector<std::string> resources, std::vector<Action> actions,
                               std::vector<std::vector<CostCurve>> curves)
    : states_(std::move(states)),
      prior_(std::move(prior)),
      resources_(std::move(resources)),
      actions_(std::move(actions)),
      curves_(std::move(curves)) {
  if (states_.empty()) throw Error(ErrorCode::kSchema, "game needs at least one state", "states");
  if (prior_.size() != static_cast<Eigen::Index>(states_.size())) {
    throw Error(ErrorCode::kSchema, "prior length differs from number of states", "prior");
  }
  if (!prior_.allFinite() || prior_.minCoeff() <= 0.0) {
    throw Error(ErrorCode::kPriorNonpositive, "every prior entry must be > 0", "prior");
  }
  if (std::abs(prior_.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kPriorSum, "prior sums to " + std::to_string(prior_.sum()), "prior");
  }
  if (std::set<std::string>(states_.begin(), states_.end()).size() != states_.size()) {
    throw Error(ErrorCode::kSchema, "duplicate state label", "states");
  }
  if (std::set<std::string>(resources_.begin(), resources_.end()).size() != resources_.size()) {
    throw Error(ErrorCode::kSchema, "duplicate resource label", "resources");
  }
  if (actions_.empty()) throw Error(ErrorCode::kSchema, "game needs at least one action", "actions");

  incidence_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(resources_.size()),
                                     static_cast<Eigen::Index>(actions_.size()));
  std::set<std::vector<std::size_t>> distinct;
  std::set<std::string> labels;
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    auto& members = actions_[a].resources;
    const std::string path = "actions[" + std::to_string(a) + "]";
    if (members.empty()) throw Error(ErrorCode::kSchema, "action uses no resource", path);
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      throw Error(ErrorCode::kSchema, "action lists a resource twice", path);
    }
    for (std::size_t e : members) {
      if (e >= resources_.size()) throw Error(ErrorCode::kLookup, "resource index out of range", path);
      incidence_(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(a)) = 1.0;
    }
    if (!distinct.insert(members).second) {
      throw Error(ErrorCode::kDuplicateAction, "two actions use the same resource set", path);
    }
    if (!labels.insert(actions_[a].label).second) {
      throw Error(ErrorCode::kDuplicateAction, "duplicate action label '" + actions_[a].label + "'", path);
    }
  }
  for (std::size_t e = 0; e < resources_.size(); ++e) {
    if (incidence_.row(static_cast<Eigen::Index>(e)).sum() == 0.0) {
      throw Error(ErrorCode::kUnusedResource, "resource '" + resources_[e] + "' is in no action",
                  "resources[" + std::to_string(e) + "]");
    }
  }
  if (curves_.size() != resources_.size()) {
    throw Error(ErrorCode::kSchema, "need one curve list per resource", "costs");
  }
  for (std::size_t e = 0; e < curves_.size(); ++e) {
    if (curves_[e].size() != states_.size()) {
      throw Error(ErrorCode::kSchema, "need one curve per state", "costs." + resources_[e]);
    }
  }
}

CongestionGame CongestionGame::singleton(std::vector<std::string> states, Eigen::VectorXd prior,
                                         std::vector<std::string> actions,
                                         std::vector<std::vector<CostCurve>> curves) {
  std::vector<Action> acts;
  for (std::size_t a = 0; a < actions.size(); ++a) acts.push_back({actions[a], {a}});
  return CongestionGame(std::move(states), std::move(prior), std::move(actions), std::move(acts),
                        std::move(curves));
}

std::vector<std::string> CongestionGame::action_labels() const {
  std::vector<std::string> out;
  out.reserve(actions_.size());
  for (const auto& a : actions_) out.push_back(a.label);
  return out;
}

namespace {
std::size_t find_label(const std::vector<std::string>& labels, std::string_view label,
                       std::string_view kind) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw Error(ErrorCode::kLookup, "unknown " + std::string(kind) + " '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}
}  // namespace

std::size_t CongestionGame::state_index(std::string_view label) const {
  return find_label(states_, label, "state");
}
std::size_t CongestionGame::resource_index(std::string_view label) const {
  return find_label(resources_, label, "resource");
}
std::size_t CongestionGame::action_index(std::string_view label) const {
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    if (actions_[a].label == label) return a;
  }
  throw Error(ErrorCode::kLookup, "unknown action '" + std::string(label) + "'");
}

CongestionGame CongestionGame::restricted_to_state(std::size_t state) const {
  if (state >= states_.size()) throw Error(ErrorCode::kLookup, "state index out of range");
  std::vector<std::vector<CostCurve>> curves(resources_.size());
  for (std::size_t e = 0; e < resources_.size(); ++e) curves[e] = {curves_[e][state]};
  return CongestionGame({states_[state]}, Eigen::VectorXd::Ones(1), resources_, actions_,
                        std::move(curves));
}

CongestionGame CongestionGame::averaged() const {
  std::vector<std::vector<CostCurve>> curves(resources_.size());
  for (std::size_t e = 0; e < resources_.size(); ++e) {
    std::vector<std::pair<double, const CostCurve*>> terms;
    for (std::size_t s = 0; s < states_.size(); ++s) {
      terms.emplace_back(prior_(static_cast<Eigen::Index>(s)), &curves_[e][s]);
    }
    curves[e] = {CostCurve::weighted_sum(terms)};
  }
  return CongestionGame({"average"}, Eigen::VectorXd::Ones(1), resources_, actions_,
                        std::move(curves));
}

Eigen::VectorXd loads(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y) {
  return game.incidence() * y;
}

Eigen::VectorXd action_costs(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                             std::size_t state) {
  const Eigen::VectorXd x = loads(game, y);
  Eigen::VectorXd resource_cost(x.size());
  for (Eigen::Index e = 0; e < x.size(); ++e) {
    resource_cost(e) = game.curve(static_cast<std::size_t>(e), state)(x(e));
  }
  return game.incidence().transpose() * resource_cost;
}

double potential(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                 std::size_t state) {
  const Eigen::VectorXd x = loads(game, y);
  double total = 0.0;
  for (Eigen::Index e = 0; e < x.size(); ++e) {
    total += game.curve(static_cast<std::size_t>(e), state).integral(x(e));
  }
  return total;
}

double social_cost_at(const CongestionGame& game, const Eigen::Ref<const Eigen::VectorXd>& y,
                      std::size_t state) {
  return y.dot(action_costs(game, y, state));
}

namespace {
void check_unit_flow(const CongestionGame& game, const FlowProfile& flow, std::size_t state) {
  if (state >= game.num_states()) throw Error(ErrorCode::kLookup, "state index out of range");
  if (flow.size() != static_cast<Eigen::Index>(game.num_actions())) {
    throw Error(ErrorCode::kDomain, "flow dimension differs from number of actions");
  }
  if (std::abs(flow.mass() - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::kDomain, "flow must have mass 1");
  }
}
}  // namespace

double action_cost(const CongestionGame& game, std::size_t action, const FlowProfile& flow,
                   std::size_t state) {
  check_unit_flow(game, flow, state);
  if (action >= game.num_actions()) throw Error(ErrorCode::kLookup, "action index out of range");
  return action_costs(game, flow.entries(), state)(static_cast<Eigen::Index>(action));
}

double action_cost(const CongestionGame& game, std::string_view action, const FlowProfile& flow,
                   std::string_view state) {
  return action_cost(game, game.action_index(action), flow, game.state_index(state));
}

double social_cost(const CongestionGame& game, const FlowProfile& flow, std::size_t state) {
  check_unit_flow(game, flow, state);
  return social_cost_at(game, flow.entries(), state);
}

double potential_value(const CongestionGame& game, const FlowProfile& flow, std::size_t state) {
  check_unit_flow(game, flow, state);
  return potential(game, flow.entries(), state);
}

ConvexityClass classify_potential(const CongestionGame& game) {
  bool strict = true;
  for (const auto& per_state : game.curves()) {
    for (const auto& curve : per_state) {
      switch (monotonicity(curve)) {
        case Monotonicity::kNone: return ConvexityClass::kNonConvex;
        case Monotonicity::kNondecreasing: strict = false; break;
        case Monotonicity::kStrictlyIncreasing: break;
      }
    }
  }
  if (game.num_actions() != game.num_resources()) strict = false;
  for (const auto& action : game.actions()) {
    if (action.resources.size() != 1) strict = false;
  }
  return strict ? ConvexityClass::kStrictlyConvexOnSimplex : ConvexityClass::kConvex;
}

double expected_social_cost(const CongestionGame& game, const FiniteOutcome& outcome) {
  if (outcome.num_states() != game.num_states()) {
    throw Error(ErrorCode::kConsistency, "outcome and game have different state counts");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    for (const auto& atom : outcome.atoms(s)) {
      total += game.prior()(static_cast<Eigen::Index>(s)) * atom.prob *
               social_cost(game, atom.flow, s);
    }
  }
  return total;
}

}  // namespace bcwe

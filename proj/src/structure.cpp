#include "bcwe/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "bcwe/errors.hpp"

namespace bcwe {

InformationStructure InformationStructure::explicit_law(
    std::vector<double> population_sizes, std::vector<std::vector<std::string>> type_sets,
    std::vector<std::string> states, std::vector<std::vector<SignalAtom>> law) {
  InformationStructure s;
  s.population_sizes_ = std::move(population_sizes);
  s.type_sets_ = std::move(type_sets);
  s.states_ = std::move(states);
  s.law_ = std::move(law);
  s.validate();
  return s;
}

InformationStructure InformationStructure::rotation_symmetric(
    std::vector<std::string> actions, std::vector<std::string> states, int populations,
    std::vector<std::vector<RotationAtom>> per_state) {
  if (populations < 1) throw Error(ErrorCode::kDomain, "rotation structure needs K >= 1");
  InformationStructure s;
  const auto k = static_cast<std::size_t>(populations);
  s.population_sizes_.assign(k, 1.0 / static_cast<double>(populations));
  s.type_sets_.assign(k, actions);
  s.states_ = std::move(states);
  Rotation rot{populations, std::vector<std::size_t>(actions.size()), std::move(per_state)};
  std::iota(rot.base_order.begin(), rot.base_order.end(), std::size_t{0});
  std::stable_sort(rot.base_order.begin(), rot.base_order.end(),
                   [&](std::size_t a, std::size_t b) { return actions[a] < actions[b]; });
  s.rotation_ = std::move(rot);
  s.validate();
  return s;
}

InformationStructure InformationStructure::null_structure(std::vector<std::string> states) {
  std::vector<std::vector<SignalAtom>> law(states.size(), {SignalAtom{{0}, 1.0}});
  return explicit_law({1.0}, {{"none"}}, std::move(states), std::move(law));
}

bool InformationStructure::is_direct(const std::vector<std::string>& actions) const {
  return std::all_of(type_sets_.begin(), type_sets_.end(),
                     [&](const std::vector<std::string>& t) { return t == actions; });
}

void InformationStructure::validate() const {
  if (population_sizes_.empty()) throw Error(ErrorCode::kSchema, "no populations", "population_sizes");
  if (type_sets_.size() != population_sizes_.size()) {
    throw Error(ErrorCode::kSchema, "one type set per population required", "type_sets");
  }
  double total = 0.0;
  for (double g : population_sizes_) {
    if (!(g > 0.0)) throw Error(ErrorCode::kDomain, "population sizes must be > 0", "population_sizes");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kDomain, "population sizes sum to " + std::to_string(total), "population_sizes");
  }
  for (std::size_t k = 0; k < type_sets_.size(); ++k) {
    if (type_sets_[k].empty()) {
      throw Error(ErrorCode::kSchema, "empty type set", "type_sets[" + std::to_string(k) + "]");
    }
  }
  if (rotation_) {
    const auto& rot = *rotation_;
    if (rot.per_state.size() != states_.size()) {
      throw Error(ErrorCode::kSchema, "rotation law needs one entry per state", "encoding");
    }
    for (std::size_t s = 0; s < rot.per_state.size(); ++s) {
      double mass = 0.0;
      for (const auto& atom : rot.per_state[s]) {
        if (atom.counts.size() != rot.base_order.size() ||
            std::accumulate(atom.counts.begin(), atom.counts.end(), 0) != rot.populations ||
            *std::min_element(atom.counts.begin(), atom.counts.end()) < 0) {
          throw Error(ErrorCode::kDomain, "recommendation counts must be nonnegative and sum to K",
                      "encoding.rotation_symmetric.per_state." + states_[s]);
        }
        if (!(atom.prob >= 0.0)) throw Error(ErrorCode::kDomain, "negative signal probability");
        mass += atom.prob;
      }
      if (std::abs(mass - 1.0) > 1e-12) {
        throw Error(ErrorCode::kDomain, "signal probabilities sum to " + std::to_string(mass),
                    "encoding.rotation_symmetric.per_state." + states_[s]);
      }
    }
    return;
  }
  if (law_.size() != states_.size()) throw Error(ErrorCode::kSchema, "law needs one entry per state", "signal_law");
  for (std::size_t s = 0; s < law_.size(); ++s) {
    double mass = 0.0;
    for (const auto& atom : law_[s]) {
      if (atom.profile.size() != population_sizes_.size()) {
        throw Error(ErrorCode::kDomain, "profile length differs from number of populations",
                    "signal_law." + states_[s]);
      }
      for (std::size_t k = 0; k < atom.profile.size(); ++k) {
        if (atom.profile[k] >= type_sets_[k].size()) {
          throw Error(ErrorCode::kDomain, "type not in the population's type set", "signal_law." + states_[s]);
        }
      }
      if (!(atom.prob >= 0.0)) throw Error(ErrorCode::kDomain, "negative signal probability");
      mass += atom.prob;
    }
    if (std::abs(mass - 1.0) > 1e-12) {
      throw Error(ErrorCode::kDomain, "signal probabilities sum to " + std::to_string(mass),
                  "signal_law." + states_[s]);
    }
  }
}

std::size_t InformationStructure::profile_count_bound() const {
  if (!rotation_) {
    std::size_t n = 0;
    for (const auto& l : law_) n += l.size();
    return n;
  }
  std::size_t n = 0;
  for (const auto& atoms : rotation_->per_state) n += atoms.size() * static_cast<std::size_t>(rotation_->populations);
  return n;
}

std::vector<InformationStructure::SignalAtom> InformationStructure::signal_law(std::size_t state) const {
  if (state >= states_.size()) throw Error(ErrorCode::kLookup, "state index out of range");
  if (!rotation_) return law_[state];
  if (profile_count_bound() > kMaxProfiles) {
    throw Error(ErrorCode::kResource, "rotation structure expands to more than " +
                                          std::to_string(kMaxProfiles) + " profiles");
  }
  const auto& rot = *rotation_;
  const auto k = static_cast<std::size_t>(rot.populations);
  std::vector<SignalAtom> out;
  std::map<std::vector<std::size_t>, std::size_t> index;
  for (const auto& atom : rot.per_state[state]) {
    if (atom.prob == 0.0) continue;
    std::vector<std::size_t> base;
    base.reserve(k);
    for (std::size_t a : rot.base_order) base.insert(base.end(), static_cast<std::size_t>(atom.counts[a]), a);
    const double share = atom.prob / static_cast<double>(k);
    std::vector<std::size_t> profile(k);
    for (std::size_t r = 0; r < k; ++r) {
      // Rotation r moves the base assignment r populations to the right.
      for (std::size_t p = 0; p < k; ++p) profile[p] = base[(p + k - r) % k];
      const auto [it, inserted] = index.emplace(profile, out.size());
      if (inserted) {
        out.push_back({profile, share});
      } else {
        out[it->second].prob += share;
      }
    }
  }
  return out;
}

}  // namespace bcwe

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bcwe {

/// Populations, their type sets and a state-dependent law over type profiles.
///
/// The law is stored either explicitly or in rotation-symmetric form: K equal
/// populations with type set = actions, and per state a list of integer
/// recommendation counts N (sum K) with probabilities. Each count vector
/// expands to the K cyclic rotations of a base assignment (actions in label
/// order, each repeated N_a times), every rotation carrying prob / K.
class InformationStructure {
 public:
  struct SignalAtom {
    /// Type index per population.
    std::vector<std::size_t> profile;
    double prob;
  };
  struct RotationAtom {
    std::vector<int> counts;
    double prob;
  };
  struct Rotation {
    int populations;
    /// Action indices in label order; the base assignment lists them in this order.
    std::vector<std::size_t> base_order;
    std::vector<std::vector<RotationAtom>> per_state;
  };

  static constexpr std::size_t kMaxProfiles = 1'000'000;

  static InformationStructure explicit_law(std::vector<double> population_sizes,
                                           std::vector<std::vector<std::string>> type_sets,
                                           std::vector<std::string> states,
                                           std::vector<std::vector<SignalAtom>> law);

  static InformationStructure rotation_symmetric(std::vector<std::string> actions,
                                                 std::vector<std::string> states, int populations,
                                                 std::vector<std::vector<RotationAtom>> per_state);

  /// One population, one type: the game without information.
  static InformationStructure null_structure(std::vector<std::string> states);

  std::size_t num_populations() const { return population_sizes_.size(); }
  const std::vector<double>& population_sizes() const { return population_sizes_; }
  const std::vector<std::vector<std::string>>& type_sets() const { return type_sets_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::optional<Rotation>& rotation() const { return rotation_; }
  bool is_rotation_symmetric() const { return rotation_.has_value(); }

  /// Every type set equals `actions` (in order).
  bool is_direct(const std::vector<std::string>& actions) const;

  /// Law of one state as explicit (profile, prob) pairs. Rotation encodings
  /// are expanded here, merging identical rotations. RESOURCE error when the
  /// expansion exceeds kMaxProfiles.
  std::vector<SignalAtom> signal_law(std::size_t state) const;

  /// Upper bound on the number of explicit profiles, without expanding.
  std::size_t profile_count_bound() const;

 private:
  InformationStructure() = default;
  void validate() const;

  std::vector<double> population_sizes_;
  std::vector<std::vector<std::string>> type_sets_;
  std::vector<std::string> states_;
  std::vector<std::vector<SignalAtom>> law_;
  std::optional<Rotation> rotation_;
};

/// Flow of every (population, type), each of that population's mass.
struct InterimFlowProfile {
  /// flows[k][t] is a vector over actions.
  std::vector<std::vector<Eigen::VectorXd>> flows;
};

}  // namespace bcwe

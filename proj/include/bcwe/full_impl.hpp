#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bcwe/auxiliary.hpp"
#include "bcwe/descent.hpp"
#include "bcwe/game.hpp"
#include "bcwe/structure.hpp"

namespace bcwe {

enum class Verdict { kUniqueOutcome, kUniqueSocialCost, kPartialOnly, kSolverLimited };

std::string_view to_string(Verdict v);

struct FullCheckConfig {
  double eta = 1e-3;
  int runs = 8;
  std::uint64_t seed = 7;
  double tol_cost = 1e-6;
  double tol_outcome = 1e-5;
  /// Tolerance for the input obedience check.
  double tol_bcwe = 1e-8;
  /// Each run uses these settings with a random start and its own seed.
  DescentConfig descent{};
};

struct SolverRun {
  std::uint64_t seed = 0;
  bool converged = false;
  long iterations = 0;
  double gap = 0.0;
  double expected_social_cost = 0.0;
  /// Distance between the run's outcome and the obedient outcome.
  double outcome_distance = 0.0;
  /// Per state |E_bcwe SC(., s) - E_run SC(., s)|.
  std::vector<double> state_residuals;
};

struct FullImplementationCertificate {
  ConvexityClass convexity;
  int K = 0;
  double eta_achieved = 0.0;
  /// Normalized epsilon of the obedient profile under the designed structure.
  double obedience_epsilon = 0.0;
  double bcwe_social_cost = 0.0;
  double obedient_social_cost = 0.0;
  std::vector<SolverRun> runs;
  /// Max over runs of the per-state residuals.
  std::vector<double> state_residuals;
  /// Max over runs of |expected SC(bcwe) - expected SC(run)|.
  double expected_cost_gap = 0.0;
  /// Largest run outcome distance to the obedient outcome.
  double max_outcome_distance = 0.0;
  Verdict verdict = Verdict::kSolverLimited;
};

/// Distance between two outcomes: per state, atoms are matched greedily by
/// nearest flow, each pair contributes flow sup-distance plus probability
/// difference, unmatched atoms contribute their probability; max over all.
double outcome_distance(const FiniteOutcome& lhs, const FiniteOutcome& rhs);

/// Designs the direct structure for `bcwe`, checks obedience and solves the
/// auxiliary game from `runs` random interior starts (concurrently). Requires
/// an obedient input and a convex potential.
FullImplementationCertificate full_check(const CongestionGame& game, const FiniteOutcome& bcwe,
                                         const FullCheckConfig& config = {});

struct ProbeConfig {
  int runs = 32;
  std::uint64_t seed = 0;
  long steps = 10000;
  double damping = 0.5;
  double tol = 1e-6;
  double dedup = 1e-4;
};

struct ProbeCandidate {
  InterimFlowProfile profile;
  FiniteOutcome outcome;
  double epsilon;
  double expected_social_cost;
  std::size_t run;
  std::string method;
};

/// Searches for distinct equilibria. Each random start is tried as is, after
/// Newton polishing of its support, after damped synchronous best response
/// (followed by polishing), and, for convex potentials, as a descent start.
/// Candidates with epsilon <= tol are kept when their outcome is farther than
/// `dedup` from every earlier candidate.
std::vector<ProbeCandidate> adversarial_probe(const CongestionGame& game, const InformationStructure& structure,
                                              const ProbeConfig& config = {});

}  // namespace bcwe

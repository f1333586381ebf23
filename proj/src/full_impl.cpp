#include "bcwe/full_impl.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <utility>

#include "bcwe/bcwe.hpp"
#include "bcwe/errors.hpp"
#include "bcwe/info_design.hpp"
#include "bcwe/random.hpp"

namespace bcwe {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kUniqueOutcome:
      return "unique_outcome";
    case Verdict::kUniqueSocialCost:
      return "unique_social_cost";
    case Verdict::kPartialOnly:
      return "partial_only";
    case Verdict::kSolverLimited:
      return "solver_limited";
  }
  return "unknown";
}

double outcome_distance(const FiniteOutcome& lhs, const FiniteOutcome& rhs) {
  if (lhs.num_states() != rhs.num_states()) {
    throw Error(ErrorCode::kConsistency, "outcomes have different numbers of states");
  }
  double dist = 0.0;
  for (std::size_t s = 0; s < lhs.num_states(); ++s) {
    const auto& a = lhs.atoms(s);
    const auto& b = rhs.atoms(s);
    std::vector<bool> used_a(a.size(), false);
    std::vector<bool> used_b(b.size(), false);
    for (std::size_t m = 0; m < std::min(a.size(), b.size()); ++m) {
      std::size_t bi = 0, bj = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (used_a[i]) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
          if (used_b[j]) continue;
          const double d = (a[i].flow.entries() - b[j].flow.entries()).cwiseAbs().maxCoeff();
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
      used_a[bi] = used_b[bj] = true;
      dist = std::max(dist, best + std::abs(a[bi].prob - b[bj].prob));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!used_a[i]) dist = std::max(dist, a[i].prob);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used_b[j]) dist = std::max(dist, b[j].prob);
    }
  }
  return dist;
}

namespace {

std::vector<double> state_social_costs(const CongestionGame& game, const FiniteOutcome& outcome) {
  std::vector<double> v(game.num_states(), 0.0);
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    for (const auto& atom : outcome.atoms(s)) v[s] += atom.prob * social_cost_at(game, atom.flow.entries(), s);
  }
  return v;
}

}  // namespace

FullImplementationCertificate full_check(const CongestionGame& game, const FiniteOutcome& bcwe,
                                         const FullCheckConfig& config) {
  if (config.runs < 1) throw Error(ErrorCode::kDomain, "full_check needs at least one run");
  const auto obedience = verify_bcwe(game, bcwe, config.tol_bcwe);
  if (!obedience.certified) {
    throw Error(ErrorCode::kDomain, "input outcome is not a BCWE (violation " +
                                        std::to_string(obedience.violation) + ")");
  }
  FullImplementationCertificate cert;
  cert.convexity = classify_potential(game);
  if (cert.convexity == ConvexityClass::kNonConvex) {
    throw Error(ErrorCode::kUnsupportedModel,
                "full implementation needs a convex potential; use adversarial_probe for this game");
  }

  const RationalApproximation approx = rational_approximation(bcwe.support(), config.eta);
  const InformationStructure structure = build_direct_structure(game, bcwe, approx);
  const AuxiliaryGame aux(game, structure);
  const InterimFlowProfile obedient = obedient_profile(structure, game.action_labels());
  const FiniteOutcome obedient_outcome = project_outcome(aux, obedient);
  cert.K = approx.K;
  cert.eta_achieved = approx.eta_achieved;
  cert.obedience_epsilon = verify_eps_bwe(aux, obedient).epsilon;
  cert.bcwe_social_cost = expected_social_cost(game, bcwe);
  cert.obedient_social_cost = total_cost(aux, obedient).expected_social_cost;
  const std::vector<double> bcwe_state_costs = state_social_costs(game, bcwe);

  auto seeder = make_rng(config.seed, 0xf011);
  std::vector<std::future<SolverRun>> pending;
  for (int r = 0; r < config.runs; ++r) {
    const std::uint64_t run_seed = seeder();
    pending.push_back(std::async(std::launch::async, [&, run_seed] {
      SolverRun run;
      run.seed = run_seed;
      DescentConfig dc = config.descent;
      dc.seed = run_seed;
      dc.random_start = true;
      try {
        const BweSolution sol = solve_bwe(aux, dc);
        // Solver noise splits atoms that agree up to the gap; compare at tol_outcome.
        const FiniteOutcome outcome =
            FiniteOutcome::merged(project_outcome(aux, sol.profile).per_state(), config.tol_outcome);
        run.converged = true;
        run.iterations = sol.iterations;
        run.gap = sol.gaps.gap();
        run.expected_social_cost = total_cost(aux, sol.profile).expected_social_cost;
        run.outcome_distance = outcome_distance(outcome, obedient_outcome);
        const auto costs = state_social_costs(game, outcome);
        for (std::size_t s = 0; s < costs.size(); ++s) {
          run.state_residuals.push_back(std::abs(costs[s] - bcwe_state_costs[s]));
        }
      } catch (const ConvergenceError& e) {
        run.converged = false;
        run.iterations = dc.max_iters;
        run.gap = e.best_gap();
      }
      return run;
    }));
  }
  for (auto& f : pending) cert.runs.push_back(f.get());
  std::sort(cert.runs.begin(), cert.runs.end(), [](const SolverRun& a, const SolverRun& b) { return a.seed < b.seed; });

  cert.state_residuals.assign(game.num_states(), 0.0);
  bool all_converged = true;
  bool outcomes_agree = true;
  bool costs_agree = true;
  for (const auto& run : cert.runs) {
    if (!run.converged) {
      all_converged = false;
      continue;
    }
    for (std::size_t s = 0; s < run.state_residuals.size(); ++s) {
      cert.state_residuals[s] = std::max(cert.state_residuals[s], run.state_residuals[s]);
    }
    cert.expected_cost_gap = std::max(cert.expected_cost_gap, std::abs(run.expected_social_cost - cert.bcwe_social_cost));
    cert.max_outcome_distance = std::max(cert.max_outcome_distance, run.outcome_distance);
    outcomes_agree = outcomes_agree && run.outcome_distance <= config.tol_outcome;
    costs_agree = costs_agree && std::abs(run.expected_social_cost - cert.obedient_social_cost) <= config.tol_cost;
  }
  if (!all_converged) {
    cert.verdict = Verdict::kSolverLimited;
  } else if (cert.convexity == ConvexityClass::kStrictlyConvexOnSimplex && outcomes_agree) {
    cert.verdict = Verdict::kUniqueOutcome;
  } else if (costs_agree) {
    cert.verdict = Verdict::kUniqueSocialCost;
  } else {
    cert.verdict = Verdict::kPartialOnly;
  }
  return cert;
}

namespace {

Eigen::Index argmin_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) < v(best)) best = i;
  }
  return best;
}

// Newton iteration on "equal normalized costs across the support" for every
// active block, with forward-difference Jacobian and backtracking.
Eigen::MatrixXd polish(const BlockPotential& pot, Eigen::MatrixXd y) {
  const auto n = pot.num_actions();
  for (int iter = 0; iter < 50; ++iter) {
    struct Unknown {
      Eigen::Index block, action, pivot;
    };
    std::vector<Unknown> unknowns;
    for (std::size_t b = 0; b < pot.num_blocks(); ++b) {
      if (!pot.active(b)) continue;
      const auto col = static_cast<Eigen::Index>(b);
      Eigen::Index pivot = -1;
      for (Eigen::Index a = 0; a < n; ++a) {
        if (y(a, col) <= 1e-6 * pot.block_mass(b)) continue;
        if (pivot < 0) {
          pivot = a;
        } else {
          unknowns.push_back({col, a, pivot});
        }
      }
    }
    if (unknowns.empty()) break;
    auto residual = [&](const Eigen::MatrixXd& z) {
      const Eigen::MatrixXd g = pot.gradient(z);
      Eigen::VectorXd r(static_cast<Eigen::Index>(unknowns.size()));
      for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto& k = unknowns[u];
        r(static_cast<Eigen::Index>(u)) =
            (g(k.action, k.block) - g(k.pivot, k.block)) / pot.block_weight(static_cast<std::size_t>(k.block));
      }
      return r;
    };
    const Eigen::VectorXd r0 = residual(y);
    const double norm0 = r0.cwiseAbs().maxCoeff();
    if (norm0 <= 1e-14) break;
    Eigen::MatrixXd jac(r0.size(), r0.size());
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
      const auto& k = unknowns[u];
      const double h = 1e-7 * pot.block_mass(static_cast<std::size_t>(k.block));
      Eigen::MatrixXd z = y;
      z(k.action, k.block) += h;
      z(k.pivot, k.block) -= h;
      jac.col(static_cast<Eigen::Index>(u)) = (residual(z) - r0) / h;
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r0);
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      Eigen::MatrixXd z = y;
      for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto& k = unknowns[u];
        z(k.action, k.block) += alpha * step(static_cast<Eigen::Index>(u));
        z(k.pivot, k.block) -= alpha * step(static_cast<Eigen::Index>(u));
      }
      for (std::size_t b = 0; b < pot.num_blocks(); ++b) {
        auto col = z.col(static_cast<Eigen::Index>(b));
        col = col.cwiseMax(0.0);
        col *= pot.block_mass(b) / col.sum();
      }
      if (residual(z).cwiseAbs().maxCoeff() < norm0) {
        y = std::move(z);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return y;
}

Eigen::MatrixXd best_response_dynamics(const BlockPotential& pot, Eigen::MatrixXd y, long steps, double damping) {
  for (long t = 0; t < steps; ++t) {
    const Eigen::MatrixXd g = pot.gradient(y);
    Eigen::MatrixXd next = y;
    for (std::size_t b = 0; b < pot.num_blocks(); ++b) {
      if (!pot.active(b)) continue;
      const auto col = static_cast<Eigen::Index>(b);
      next.col(col) *= 1.0 - damping;
      next(argmin_lowest(g.col(col)), col) += damping * pot.block_mass(b);
    }
    const bool fixed = (next - y).cwiseAbs().maxCoeff() == 0.0;
    y = std::move(next);
    if (fixed) break;
  }
  return y;
}

}  // namespace

std::vector<ProbeCandidate> adversarial_probe(const CongestionGame& game, const InformationStructure& structure,
                                              const ProbeConfig& config) {
  const AuxiliaryGame aux(game, structure);
  const BlockPotential& pot = aux.potential();
  const bool convex = classify_potential(game) != ConvexityClass::kNonConvex;
  std::vector<ProbeCandidate> found;

  auto consider = [&](const Eigen::MatrixXd& y, std::size_t run, const char* method) {
    const InterimFlowProfile profile = aux.from_matrix(y);
    const InterimCostReport report = verify_eps_bwe(aux, profile);
    if (!report.certified(config.tol)) return;
    FiniteOutcome outcome = project_outcome(aux, profile);
    for (const auto& c : found) {
      if (outcome_distance(c.outcome, outcome) <= config.dedup) return;
    }
    const double cost = total_cost(aux, profile).expected_social_cost;
    found.push_back({profile, std::move(outcome), report.epsilon, cost, run, method});
  };

  for (int r = 0; r < config.runs; ++r) {
    const auto run = static_cast<std::size_t>(r);
    auto rng = make_rng(config.seed, 0x9b0be + run);
    Eigen::MatrixXd y0 = pot.uniform_flows();
    for (std::size_t b = 0; b < pot.num_blocks(); ++b) {
      if (pot.active(b)) y0.col(static_cast<Eigen::Index>(b)) = random_simplex_point(rng, pot.num_actions(), pot.block_mass(b));
    }
    consider(y0, run, "start");
    consider(polish(pot, y0), run, "polished_start");
    const Eigen::MatrixXd y1 = best_response_dynamics(pot, y0, config.steps, config.damping);
    consider(y1, run, "best_response");
    consider(polish(pot, y1), run, "polished_best_response");
    if (convex) {
      DescentConfig dc;
      dc.target_gap = 1e-10;
      try {
        consider(minimize_potential(pot, dc, y0).flows, run, "descent");
      } catch (const ConvergenceError&) {
      }
    }
  }
  return found;
}

}  // namespace bcwe

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bcwe/auxiliary.hpp"
#include "bcwe/bcwe.hpp"
#include "bcwe/errors.hpp"
#include "bcwe/full_impl.hpp"
#include "bcwe/info_design.hpp"
#include "bcwe/wardrop.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles/grid_bcwe.hpp"

using namespace bcwe;
using fixtures::vec;

namespace {

// Collects failed checks with a short reason each.
class Checks {
 public:
  void operator()(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(17);
      s << what << ": got " << got << ", want " << want << " +- " << tol;
      failures_.push_back(s.str());
    }
  }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

struct Criterion {
  int id;
  const char* title;
  std::function<std::string(Checks&)> run;
};

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

InformationStructure designed(const CongestionGame& g, const FiniteOutcome& mu) {
  return build_direct_structure(g, mu, rational_approximation(mu.support(), 0.0));
}

std::string criterion1(Checks& check) {
  const ObedienceReport r = verify_bcwe(fixtures::example1(), fixtures::example1_bcwe(), 1e-12);
  // Rows: recommended action; columns: deviation.
  check.near(r.lhs(0, 1), 5.0 / 12, 1e-12, "lhs(a->b)");
  check.near(r.rhs(0, 1), 16.0 / 36, 1e-12, "rhs(a->b)");
  check.near(r.lhs(1, 0), 1.0 / 18, 1e-12, "lhs(b->a)");
  check.near(r.rhs(1, 0), 1.0 / 12, 1e-12, "rhs(b->a)");
  check(r.certified, "outcome not certified obedient");
  return "violation " + num(r.violation);
}

std::string criterion2(Checks& check) {
  // Exact oracle first: every feasible basis of the D = 6 program in rational arithmetic.
  const auto exact = oracle::grid_bcwe_min_social_cost(oracle::example1_exact(), 6);
  check(exact.has_value(), "oracle found the grid program infeasible");
  if (!exact) return "";
  check(exact->value == oracle::Rational(17, 36), "oracle optimum differs from 17/36");
  check(exact->weights[0][0] == 1 && exact->weights[1][1] == 1, "oracle support differs from (1,0) | (5/6,1/6)");

  const BcweOptimum opt = optimize_bcwe(fixtures::example1(), BcweObjective::social_cost(), FlowGrid(6, 2));
  check.near(opt.value, 17.0 / 36, 1e-9, "LP value");
  check.near(opt.value, static_cast<double>(exact->value), 1e-12, "LP value vs oracle");
  const auto& low = opt.outcome.atoms(0);
  const auto& high = opt.outcome.atoms(1);
  check(low.size() == 1 && high.size() == 1, "optimum is not a single flow per state");
  if (low.size() == 1 && high.size() == 1) {
    check.near(low[0].flow[0], 1.0, 1e-9, "low-state y_a");
    check.near(high[0].flow[1], 1.0 / 6, 1e-9, "high-state y_b");
  }
  return std::to_string(exact->feasible_bases) + " feasible bases enumerated, " + std::to_string(opt.pivots) +
         " pivots";
}

std::string criterion3(Checks& check) {
  const CongestionGame g = fixtures::example1();
  const FiniteOutcome mu = fixtures::example1_bcwe();
  const RationalApproximation approx = rational_approximation(mu.support(), 0.0);
  check(approx.K == 6, "K = " + std::to_string(approx.K));
  const InformationStructure s = build_direct_structure(g, mu, approx);
  check(s.is_rotation_symmetric() && s.num_populations() == 6, "not a six-population rotation structure");
  const auto low = s.signal_law(0);
  const auto high = s.signal_law(1);
  check(low.size() + high.size() == 7, "profile count " + std::to_string(low.size() + high.size()));
  if (low.size() == 1) {
    check.near(low[0].prob, 1.0, 1e-15, "low-state profile probability");
    check(std::all_of(low[0].profile.begin(), low[0].profile.end(), [](std::size_t t) { return t == 0; }),
          "low-state profile is not all a");
  }
  std::vector<int> b_at;
  for (const auto& atom : high) {
    check.near(atom.prob, 1.0 / 6, 1e-15, "high-state profile probability");
    check(std::count(atom.profile.begin(), atom.profile.end(), std::size_t{1}) == 1, "high profile without one b");
    b_at.push_back(static_cast<int>(std::find(atom.profile.begin(), atom.profile.end(), std::size_t{1}) -
                                    atom.profile.begin()));
  }
  std::sort(b_at.begin(), b_at.end());
  check(b_at == std::vector<int>{0, 1, 2, 3, 4, 5}, "b recommendations do not rotate over all populations");
  const InterimCostReport r = verify_eps_bwe(g, s, obedient_profile(s, g.action_labels()));
  check(r.epsilon <= 1e-12, "obedient epsilon " + std::to_string(r.epsilon));
  std::ostringstream out;
  out << "K = " << approx.K << ", obedient epsilon " << r.epsilon;
  return out.str();
}

std::string criterion4(Checks& check) {
  FullCheckConfig cfg;
  cfg.runs = 8;
  const FullImplementationCertificate cert = full_check(fixtures::example1(), fixtures::example1_bcwe(), cfg);
  check(cert.verdict == Verdict::kUniqueSocialCost, std::string("verdict ") + std::string(to_string(cert.verdict)));
  check(cert.runs.size() == 8, "run count");
  double worst = 0.0;
  for (const auto& run : cert.runs) {
    check(run.converged, "run with seed " + std::to_string(run.seed) + " did not converge");
    worst = std::max(worst, std::abs(run.expected_social_cost - 17.0 / 36));
  }
  check(worst <= 1e-6, "social cost deviation " + std::to_string(worst));
  std::ostringstream out;
  out << to_string(cert.verdict) << ", worst deviation " << worst;
  return out.str();
}

std::string criterion5(Checks& check) {
  const CongestionGame g = fixtures::example2();
  for (double ya : {1.0, 0.75, 0.25}) {
    const FlowProfile y(vec({ya, 1 - ya}));
    const EquilibriumGapReport r = verify_wardrop(g, y, 0, 1e-12);
    check.near(r.gap, 0.0, 1e-12, "Wardrop gap at y_a = " + std::to_string(ya));
    check.near(social_cost(g, y, 0), 1.0, 1e-12, "social cost at y_a = " + std::to_string(ya));
  }
  const FiniteOutcome mu = fixtures::example2_bcwe();
  const ObedienceReport ob = verify_bcwe(g, mu, 1e-12);
  check.near(ob.slack(0, 1), 0.0, 1e-12, "slack(a->b)");
  check.near(ob.slack(1, 0), 1.0 / 3, 1e-12, "slack(b->a)");
  check.near(expected_social_cost(g, mu), 2.0 / 3, 1e-12, "expected social cost");

  const RationalApproximation approx = rational_approximation(mu.support(), 0.0);
  check(approx.K == 2, "K = " + std::to_string(approx.K));
  const InformationStructure s = build_direct_structure(g, mu, approx);
  std::map<std::vector<std::size_t>, double> law;
  for (const auto& atom : s.signal_law(0)) law[atom.profile] += atom.prob;
  check(law.size() == 3, "profile count " + std::to_string(law.size()));
  for (const std::vector<std::size_t>& p : {std::vector<std::size_t>{0, 0}, {0, 1}, {1, 0}}) {
    check.near(law[p], 1.0 / 3, 1e-15, "pi(" + std::to_string(p[0]) + "," + std::to_string(p[1]) + ")");
  }
  const double eps = verify_eps_bwe(g, s, obedient_profile(s, g.action_labels())).epsilon;
  check(eps <= 1e-12, "obedient epsilon " + std::to_string(eps));
  return "obedient epsilon " + num(eps);
}

std::string criterion6(Checks& check) {
  ProbeConfig cfg;
  cfg.runs = 32;
  const auto found = adversarial_probe(fixtures::example2(), InformationStructure::null_structure({"only"}), cfg);
  std::vector<double> distinct;
  for (const auto& c : found) {
    check(c.epsilon <= 1e-6, "candidate epsilon " + std::to_string(c.epsilon));
    check.near(c.expected_social_cost, 1.0, 1e-6, "candidate social cost");
    const double ya = c.outcome.atoms(0)[0].flow[0];
    if (std::none_of(distinct.begin(), distinct.end(), [&](double x) { return std::abs(x - ya) <= 1e-4; })) {
      distinct.push_back(ya);
    }
  }
  check(distinct.size() >= 3, std::to_string(distinct.size()) + " distinct outcomes");
  std::sort(distinct.begin(), distinct.end());
  std::ostringstream out;
  out << distinct.size() << " distinct outcomes, y_a in {";
  for (std::size_t i = 0; i < distinct.size(); ++i) out << (i ? ", " : "") << distinct[i];
  out << "}";
  return out.str();
}

std::string criterion7(Checks& check) {
  gen::Rng rng(2024);
  const double h = 1e-6;
  int fd_checks = 0;

  // Per-state potential and the auxiliary block potential against central differences.
  for (int trial = 0; trial < 20; ++trial) {
    const CongestionGame g = gen::network_game(rng, 2, trial % 2 == 0);
    for (std::size_t s = 0; s < 2; ++s) {
      const Eigen::VectorXd y = gen::interior_flow(rng, 4);
      const Eigen::VectorXd c = action_costs(g, y, s);
      for (Eigen::Index a = 0; a < 4; ++a) {
        Eigen::VectorXd up = y, down = y;
        up(a) += h;
        down(a) -= h;
        const double fd = (potential(g, up, s) - potential(g, down, s)) / (2 * h);
        check(std::abs(fd - c(a)) <= 1e-6 * std::max(1.0, std::abs(c(a))), "state potential gradient");
        ++fd_checks;
      }
    }
    const AuxiliaryGame aux(g, gen::random_structure(rng, g.states()));
    const Eigen::MatrixXd y = aux.to_matrix(gen::random_profile(rng, aux.structure(), g.num_actions()));
    const Eigen::MatrixXd grad = aux.potential().gradient(y);
    for (Eigen::Index b = 0; b < y.cols(); ++b) {
      for (Eigen::Index a = 0; a < y.rows(); ++a) {
        Eigen::MatrixXd up = y, down = y;
        up(a, b) += h;
        down(a, b) -= h;
        const double fd = (aux.potential().value(up) - aux.potential().value(down)) / (2 * h);
        check(std::abs(fd - grad(a, b)) <= 1e-6 * std::max(1.0, std::abs(grad(a, b))), "block potential gradient");
        ++fd_checks;
      }
    }
  }

  // Total cost identity and the alpha-minimizer inequality per fixture.
  const CongestionGame g1 = fixtures::example1();
  const CongestionGame g2 = fixtures::example2();
  const CongestionGame g3 = gen::network_game(rng, 2, true);
  const std::vector<std::pair<const CongestionGame*, InformationStructure>> fixtures_list{
      {&g1, designed(g1, fixtures::example1_bcwe())},
      {&g2, designed(g2, fixtures::example2_bcwe())},
      {&g1, InformationStructure::null_structure(g1.states())},
      {&g3, gen::random_structure(rng, g3.states())}};
  double worst_tc = 0.0;
  int alpha_checks = 0;
  for (const auto& [g, s] : fixtures_list) {
    const AuxiliaryGame aux(*g, s);
    for (int trial = 0; trial < 100; ++trial) {
      const auto tc = total_cost(aux, gen::random_profile(rng, s, g->num_actions()));
      worst_tc = std::max(worst_tc, std::abs(tc.total_cost - tc.expected_social_cost));
    }
    if (classify_potential(*g) == ConvexityClass::kNonConvex) continue;
    DescentConfig cfg;
    cfg.target_gap = 1e-10;
    const Eigen::MatrixXd star = aux.to_matrix(solve_bwe(aux, cfg).profile);
    const double phi_star = aux.potential().value(star);
    for (int trial = 0; trial < 100; ++trial) {
      const double t = std::pow(10.0, gen::uniform(rng, -4.0, 0.0));
      const Eigen::MatrixXd z = aux.to_matrix(gen::random_profile(rng, s, g->num_actions()));
      const Eigen::MatrixXd y = (1 - t) * star + t * z;
      const double alpha = verify_eps_bwe(aux, aux.from_matrix(y)).epsilon;
      check(aux.potential().value(y) <= phi_star + alpha + 1e-9, "alpha-minimizer inequality");
      ++alpha_checks;
    }
  }
  check(worst_tc <= 1e-12, "total cost identity off by " + std::to_string(worst_tc));

  // Strictly increasing affine singleton games: two seeds, one equilibrium outcome.
  double worst_atom = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const CongestionGame g = gen::strictly_affine_game(rng, static_cast<std::size_t>(gen::integer(rng, 2, 3)), 2);
    const AuxiliaryGame aux(g, gen::random_structure(rng, g.states()));
    DescentConfig a;
    a.target_gap = 1e-10;
    a.random_start = true;
    a.seed = 2 * static_cast<std::uint64_t>(trial);
    DescentConfig b = a;
    b.seed = a.seed + 1;
    const Eigen::MatrixXd ta = aux.potential().totals(aux.to_matrix(solve_bwe(aux, a).profile));
    const Eigen::MatrixXd tb = aux.potential().totals(aux.to_matrix(solve_bwe(aux, b).profile));
    const auto& terms = aux.potential().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (terms[j].weight == 0.0) continue;
      const auto col = static_cast<Eigen::Index>(j);
      worst_atom = std::max(worst_atom, (ta.col(col) - tb.col(col)).cwiseAbs().maxCoeff());
    }
  }
  check(worst_atom <= 1e-5, "two-seed outcome atoms differ by " + std::to_string(worst_atom));

  std::ostringstream out;
  out << fd_checks << " gradient entries, TC identity " << worst_tc << ", " << alpha_checks
      << " alpha checks, atom spread " << worst_atom;
  return out.str();
}

std::string criterion8(Checks& check) {
  const double eta = 1e-3;
  gen::Rng rng(808);
  int max_k = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<Eigen::VectorXd> flows{gen::interior_flow(rng, 2, 1.0, 0.0)};
    const RationalApproximation approx = rational_approximation(flows, eta);
    check(std::accumulate(approx.counts[0].begin(), approx.counts[0].end(), 0) == approx.K, "counts do not sum to K");
    check((approx.rational_flow(0) - flows[0]).cwiseAbs().maxCoeff() <= eta, "deviation above eta");
    check(approx.eta_achieved <= eta, "reported deviation above eta");
    max_k = std::max(max_k, approx.K);
  }

  // Fully revealing BCWE of random two-state games, kept when the smallest
  // positive flow is at least 2 eta (the bound's precondition).
  int accepted = 0, skipped = 0;
  double worst_margin = -1.0;
  while (accepted < 20 && skipped < 500) {
    const CongestionGame g = gen::strictly_affine_game(rng, 2, 2);
    const FiniteOutcome mu = fully_revealing_bcwe(g);
    const RationalApproximation approx = rational_approximation(mu.support(), eta);
    const LipschitzEstimate lip = estimate_modulus(g, 256, static_cast<std::uint64_t>(accepted + skipped));
    double bound = 0.0;
    try {
      bound = epsilon_bound(approx, mu, lip);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    ++accepted;
    check(std::isfinite(bound), "epsilon bound is not finite");
    const InformationStructure s = build_direct_structure(g, mu, approx);
    const double eps = verify_eps_bwe(g, s, obedient_profile(s, g.action_labels())).epsilon;
    check(eps <= bound + 1e-9, "epsilon " + std::to_string(eps) + " above bound " + std::to_string(bound));
    worst_margin = std::max(worst_margin, eps - bound);
  }
  check(accepted == 20, "only " + std::to_string(accepted) + " sampled BCWE met the precondition");
  std::ostringstream out;
  out << "max K " << max_k << ", " << accepted << " designs (" << skipped << " below 2 eta skipped), max eps - bound "
      << worst_margin;
  return out.str();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "two-state obedience arithmetic", criterion1},
      {2, "two-state LP optimum", criterion2},
      {3, "two-state synthesis", criterion3},
      {4, "two-state full implementation", criterion4},
      {5, "single-state fixtures", criterion5},
      {6, "single-state multiplicity", criterion6},
      {7, "property suite", criterion7},
      {8, "rational approximation contract", criterion8},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Checks checks;
    std::string detail;
    const auto start = std::chrono::steady_clock::now();
    try {
      detail = c.run(checks);
    } catch (const std::exception& e) {
      checks(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = checks.failures().empty();
    if (!ok) ++failed;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, c.title, ok ? "PASS" : "FAIL", seconds,
                ok ? detail.c_str() : checks.failures().front().c_str());
    for (std::size_t i = 1; i < checks.failures().size() && i < 5; ++i) {
      std::printf("    also: %s\n", checks.failures()[i].c_str());
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

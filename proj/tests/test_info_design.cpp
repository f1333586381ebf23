#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "doctest.h"

#include "bcwe/auxiliary.hpp"
#include "bcwe/bcwe.hpp"
#include "bcwe/errors.hpp"
#include "bcwe/info_design.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace bcwe;
using fixtures::vec;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

std::vector<Eigen::VectorXd> support_of(const FiniteOutcome& mu) { return mu.support(); }

// Smallest K whose nearest-integer rounding of a two-action flow is within eta.
int brute_force_two_action_k(const std::vector<Eigen::VectorXd>& flows, double eta) {
  for (int K = 1;; ++K) {
    bool ok = true;
    for (const auto& y : flows) ok = ok && std::abs(std::round(K * y(0)) / K - y(0)) <= eta;
    if (ok) return K;
  }
}

// All size-n subsets of {0..K-1} as bitmasks.
std::vector<unsigned> subsets(int K, int n) {
  std::vector<unsigned> out;
  for (unsigned m = 0; m < (1u << K); ++m) {
    if (std::popcount(m) == n) out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_SUITE("info_design") {
  TEST_CASE("rational fast path") {
    const auto a = rational_approximation({vec({1, 0}), vec({5.0 / 6, 1.0 / 6})}, 0.0);
    CHECK(a.K == 6);
    CHECK(a.counts[0] == std::vector<int>{6, 0});
    CHECK(a.counts[1] == std::vector<int>{5, 1});
    CHECK(a.eta_achieved == 0.0);
    const auto half = rational_approximation({vec({0.5, 0.5})}, 0.3);
    CHECK(half.K == 2);
    CHECK(half.counts[0] == std::vector<int>{1, 1});
    CHECK(half.eta_achieved == 0.0);
    CHECK(half.rational_flow(0)(1) == 0.5);
  }

  TEST_CASE("irrational flows need a positive eta") {
    const Eigen::VectorXd y = vec({1 / std::sqrt(2.0), 1 - 1 / std::sqrt(2.0)});
    const auto a = rational_approximation({y}, 0.01);
    CHECK(a.K <= 200);
    CHECK(a.K == brute_force_two_action_k({y}, 0.01));
    CHECK((a.rational_flow(0) - y).cwiseAbs().maxCoeff() <= 0.01);
    CHECK(code_of([&] { rational_approximation({y}, 0.0); }) == ErrorCode::kDomain);
    CHECK(code_of([&] { rational_approximation({y}, -1.0); }) == ErrorCode::kDomain);
    CHECK(code_of([&] { rational_approximation({vec({0.5, 0.6})}, 0.1); }) == ErrorCode::kDomain);
  }

  TEST_CASE("largest remainder rounding") {
    CHECK(largest_remainder(vec({0.5, 0.5}), 3) == std::vector<int>{2, 1});
    CHECK(largest_remainder(vec({1.0 / 3, 1.0 / 3, 1.0 / 3}), 4) == std::vector<int>{2, 1, 1});
    CHECK(largest_remainder(vec({0.25, 0.25, 0.5}), 2) == std::vector<int>{1, 0, 1});
    CHECK(largest_remainder(vec({0.1, 0.3, 0.6}), 4) == std::vector<int>{1, 1, 2});
    CHECK(largest_remainder(vec({1, 0}), 7) == std::vector<int>{7, 0});
  }

  TEST_CASE("approximation contract on random flows") {
    gen::Rng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::Index n = trial < 100 ? 2 : gen::integer(rng, 3, 4);
      std::vector<Eigen::VectorXd> flows;
      const int m = gen::integer(rng, 1, 3);
      for (int i = 0; i < m; ++i) flows.push_back(gen::interior_flow(rng, n, 1.0, 0.0));
      const double eta = std::pow(10.0, gen::uniform(rng, -3.5, -1.0));
      const auto a = rational_approximation(flows, eta);
      CHECK(a.eta_achieved <= eta);
      for (std::size_t i = 0; i < flows.size(); ++i) {
        CHECK(std::accumulate(a.counts[i].begin(), a.counts[i].end(), 0) == a.K);
        CHECK((a.rational_flow(i) - flows[i]).cwiseAbs().maxCoeff() <= eta);
      }
      if (n == 2) CHECK(a.K == brute_force_two_action_k(flows, eta));
    }
  }

  TEST_CASE("designed structure of the two-state example") {
    const CongestionGame g = fixtures::example1();
    const FiniteOutcome mu = fixtures::example1_bcwe();
    const auto approx = rational_approximation(support_of(mu), 0.0);
    const auto s = build_direct_structure(g, mu, approx);
    CHECK(s.is_rotation_symmetric());
    CHECK(s.num_populations() == 6);
    for (double gamma : s.population_sizes()) CHECK(gamma == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(s.is_direct(g.action_labels()));

    const auto low = s.signal_law(0);
    REQUIRE(low.size() == 1);
    CHECK(low[0].prob == doctest::Approx(1.0));
    CHECK(std::count(low[0].profile.begin(), low[0].profile.end(), 0u) == 6);

    const auto high = s.signal_law(1);
    REQUIRE(high.size() == 6);
    std::vector<int> b_position;
    for (const auto& atom : high) {
      CHECK(atom.prob == doctest::Approx(1.0 / 6).epsilon(1e-14));
      CHECK(std::count(atom.profile.begin(), atom.profile.end(), 1u) == 1);
      b_position.push_back(static_cast<int>(std::find(atom.profile.begin(), atom.profile.end(), 1u) - atom.profile.begin()));
    }
    std::sort(b_position.begin(), b_position.end());
    CHECK(b_position == std::vector<int>{0, 1, 2, 3, 4, 5});
  }

  TEST_CASE("designed structure of the single-state example") {
    const CongestionGame g = fixtures::example2();
    const FiniteOutcome mu = fixtures::example2_bcwe();
    const auto s = build_direct_structure(g, mu, rational_approximation(support_of(mu), 0.0));
    CHECK(s.num_populations() == 2);
    const auto law = s.signal_law(0);
    REQUIRE(law.size() == 3);
    std::map<std::vector<std::size_t>, double> by_profile;
    for (const auto& atom : law) by_profile[atom.profile] = atom.prob;
    CHECK(by_profile[{0, 0}] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(by_profile[{0, 1}] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(by_profile[{1, 0}] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }

  TEST_CASE("point mass and mismatched approximations") {
    const CongestionGame g = fixtures::example1();
    const FiniteOutcome point({{{FlowProfile(vec({1, 0})), 1.0}}, {{FlowProfile(vec({1, 0})), 1.0}}});
    const auto s = build_direct_structure(g, point, rational_approximation(support_of(point), 0.0));
    CHECK(s.num_populations() == 1);
    for (std::size_t st = 0; st < 2; ++st) {
      const auto law = s.signal_law(st);
      REQUIRE(law.size() == 1);
      CHECK(law[0].profile == std::vector<std::size_t>{0});
    }
    const auto other = rational_approximation({vec({0.5, 0.5})}, 0.0);
    CHECK(code_of([&] { build_direct_structure(g, fixtures::example1_bcwe(), other); }) == ErrorCode::kConsistency);
  }

  TEST_CASE("obedient profiles") {
    const CongestionGame g = fixtures::example1();
    const FiniteOutcome mu = fixtures::example1_bcwe();
    const auto s = build_direct_structure(g, mu, rational_approximation(support_of(mu), 0.0));
    const auto p = obedient_profile(s, g.action_labels());
    REQUIRE(p.flows.size() == 6);
    for (const auto& per_type : p.flows) {
      REQUIRE(per_type.size() == 2);
      CHECK(per_type[0](0) == doctest::Approx(1.0 / 6));
      CHECK(per_type[0](1) == 0.0);
      CHECK(per_type[1](1) == doctest::Approx(1.0 / 6));
    }
    const auto null = InformationStructure::null_structure(g.states());
    CHECK(code_of([&] { obedient_profile(null, g.action_labels()); }) == ErrorCode::kDomain);
    const FiniteOutcome point({{{FlowProfile(vec({1, 0})), 1.0}}, {{FlowProfile(vec({1, 0})), 1.0}}});
    const auto one = build_direct_structure(g, point, rational_approximation(support_of(point), 0.0));
    CHECK(obedient_profile(one, g.action_labels()).flows[0][0](0) == 1.0);
  }

  TEST_CASE("rotation marginals equal the rounded flow") {
    gen::Rng rng(52);
    for (int trial = 0; trial < 30; ++trial) {
      const int K = gen::integer(rng, 1, 9);
      const std::size_t n = static_cast<std::size_t>(gen::integer(rng, 2, 4));
      std::vector<int> counts(n, 0);
      for (int i = 0; i < K; ++i) ++counts[static_cast<std::size_t>(gen::integer(rng, 0, static_cast<int>(n) - 1))];
      const auto actions = gen::labels("a", n);
      const auto s = InformationStructure::rotation_symmetric(actions, {"s"}, K, {{{counts, 1.0}}});
      const auto law = s.signal_law(0);
      for (int k = 0; k < K; ++k) {
        for (std::size_t a = 0; a < n; ++a) {
          double p = 0.0;
          for (const auto& atom : law) {
            if (atom.profile[static_cast<std::size_t>(k)] == a) p += atom.prob;
          }
          // Rotation probabilities are multiples of 1/K.
          CHECK(std::lround(p * K) == counts[a]);
          CHECK(std::abs(p * K - counts[a]) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("rotation and uniform-subset encodings give the same interim costs") {
    const CongestionGame g1 = fixtures::example1();
    const FiniteOutcome mu2({{{FlowProfile(vec({0.5, 0.5})), 0.4}, {FlowProfile(vec({2.0 / 3, 1.0 / 3})), 0.6}},
                             {{FlowProfile(vec({1, 0})), 1.0}}});
    for (const FiniteOutcome& mu : {fixtures::example1_bcwe(), mu2}) {
      const auto approx = rational_approximation(support_of(mu), 0.0);
      REQUIRE(approx.K == 6);
      const auto rot = build_direct_structure(g1, mu, approx);

      std::vector<std::vector<InformationStructure::SignalAtom>> law(2);
      for (std::size_t st = 0; st < 2; ++st) {
        for (const auto& atom : mu.atoms(st)) {
          const int nb = static_cast<int>(std::lround(atom.flow[1] * 6));
          const auto masks = subsets(6, nb);
          for (unsigned m : masks) {
            std::vector<std::size_t> profile(6);
            for (int k = 0; k < 6; ++k) profile[static_cast<std::size_t>(k)] = (m >> k) & 1u;
            law[st].push_back({profile, atom.prob / static_cast<double>(masks.size())});
          }
        }
      }
      const auto uniform = InformationStructure::explicit_law(std::vector<double>(6, 1.0 / 6),
                                                              std::vector<std::vector<std::string>>(6, {"a", "b"}),
                                                              g1.states(), law);
      const auto r1 = verify_eps_bwe(g1, rot, obedient_profile(rot, g1.action_labels()));
      const auto r2 = verify_eps_bwe(g1, uniform, obedient_profile(uniform, g1.action_labels()));
      REQUIRE(r1.types.size() == r2.types.size());
      for (std::size_t i = 0; i < r1.types.size(); ++i) {
        CHECK(r1.types[i].excluded == r2.types[i].excluded);
        CHECK(r1.types[i].probability == doctest::Approx(r2.types[i].probability).epsilon(1e-12));
        CHECK((r1.types[i].conditional_costs - r2.types[i].conditional_costs).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  TEST_CASE("modulus estimates") {
    // d(y_b c_b)/dy_b = 4 y_b + 1/3 peaks at 13/3 on the simplex.
    const auto l1 = estimate_modulus(fixtures::example1(), 256, 3);
    CHECK(l1.L <= 13.0 / 3 + 1e-9);
    CHECK(l1.L >= 4.0);
    CHECK(l1.sample_count > 256);
    const auto ones = CongestionGame::singleton({"s"}, vec({1}), {"a", "b"},
                                                {{CostCurve::constant(1)}, {CostCurve::constant(1)}});
    const auto l2 = estimate_modulus(ones, 256, 3);
    CHECK(l2.L <= 1.0 + 1e-9);
    CHECK(l2.L >= 0.99);
    const auto zero = CongestionGame::singleton({"s"}, vec({1}), {"a", "b"},
                                                {{CostCurve::constant(0)}, {CostCurve::constant(0)}});
    CHECK(estimate_modulus(zero, 256, 3).L == 0.0);
    CHECK(code_of([&] { estimate_modulus(zero, 1, 3); }) == ErrorCode::kDomain);
    // Same seed, same estimate.
    CHECK(estimate_modulus(fixtures::example1(), 64, 9).L == estimate_modulus(fixtures::example1(), 64, 9).L);
  }

  TEST_CASE("modulus of the social cost functional") {
    // SC = y_a 1{high} + y_b (2 y_b + 1/3); slope along y_b is 4 y_b + 1/3 - 1{high}.
    const CongestionGame g = fixtures::example1();
    const FlowFunctional sc = [&](const Eigen::VectorXd& y, std::size_t s) {
      return Eigen::VectorXd::Constant(1, social_cost_at(g, y, s));
    };
    const auto l = estimate_modulus(g, sc, 256, 4);
    CHECK(l.L <= 13.0 / 3 + 1e-9);
    CHECK(l.L >= 4.0);
  }

  TEST_CASE("epsilon bound arithmetic") {
    const FiniteOutcome mu = fixtures::example1_bcwe();
    CHECK(smallest_positive_flow(mu) == doctest::Approx(1.0 / 6));
    RationalApproximation approx = rational_approximation(support_of(mu), 0.0);
    CHECK(epsilon_bound(approx, mu, {4.0, 10}) == 0.0);
    approx.eta_achieved = 1.0 / 120;
    CHECK(epsilon_bound(approx, mu, {4.0, 10}) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(epsilon_bound(approx, mu, {0.0, 10}) == 0.0);
    approx.eta_achieved = 0.1;
    CHECK(code_of([&] { epsilon_bound(approx, mu, {4.0, 10}); }) == ErrorCode::kDomain);
  }

  TEST_CASE("rational equilibria are implemented exactly") {
    gen::Rng rng(53);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = trial % 2 == 0 ? 2 : 3;
      const CongestionGame g = gen::strictly_affine_game(rng, n, 2);
      BcweOptimum opt{FiniteOutcome({{{FlowProfile(vec({1})), 1.0}}}), 0.0, 0};
      try {
        opt = optimize_bcwe(g, BcweObjective::social_cost(), FlowGrid(n == 2 ? 6 : 4, n));
      } catch (const InfeasibleError&) {
        continue;
      }
      ++checked;
      const auto approx = rational_approximation(support_of(opt.outcome), 0.0);
      CHECK(approx.eta_achieved == 0.0);
      const auto s = build_direct_structure(g, opt.outcome, approx);
      const auto r = verify_eps_bwe(g, s, obedient_profile(s, g.action_labels()));
      CHECK(r.epsilon <= 1e-9);
    }
    CHECK(checked >= 5);
  }

  TEST_CASE("approximate designs stay within the epsilon bound") {
    gen::Rng rng(54);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const CongestionGame g = gen::strictly_affine_game(rng, 2, 2);
      const FiniteOutcome mu = fully_revealing_bcwe(g);
      const auto approx = rational_approximation(support_of(mu), 1e-3);
      const auto lip = estimate_modulus(g, 256, static_cast<std::uint64_t>(trial));
      double bound = 0.0;
      try {
        bound = epsilon_bound(approx, mu, lip);
      } catch (const Error&) {
        continue;
      }
      ++checked;
      CHECK(std::isfinite(bound));
      const auto s = build_direct_structure(g, mu, approx);
      CHECK(verify_eps_bwe(g, s, obedient_profile(s, g.action_labels())).epsilon <= bound + 1e-9);
    }
    CHECK(checked >= 10);
  }
}

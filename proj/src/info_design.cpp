#include "bcwe/info_design.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "bcwe/bcwe.hpp"
#include "bcwe/errors.hpp"
#include "bcwe/random.hpp"

namespace bcwe {

namespace {

constexpr std::int64_t kMaxDenominator = 1'000'000;

struct Fraction {
  std::int64_t num;
  std::int64_t den;
};

// Convergent p/q of x with q <= kMaxDenominator that reproduces x to a few ulps.
std::optional<Fraction> exact_fraction(double x) {
  const double tol = 4.0 * DBL_EPSILON * std::max(1.0, std::abs(x));
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    if (a > 1e12) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > kMaxDenominator) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) return Fraction{h1, k1};
    const double frac = r - a;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

std::optional<RationalApproximation> exact_approximation(const std::vector<Eigen::VectorXd>& flows) {
  std::int64_t d = 1;
  std::vector<std::vector<Fraction>> fracs;
  for (const auto& y : flows) {
    auto& row = fracs.emplace_back();
    for (Eigen::Index a = 0; a < y.size(); ++a) {
      const auto f = exact_fraction(y(a));
      if (!f) return std::nullopt;
      d = std::lcm(d, f->den);
      if (d > kMaxDenominator) return std::nullopt;
      row.push_back(*f);
    }
  }
  RationalApproximation approx;
  approx.K = static_cast<int>(d);
  approx.flows = flows;
  for (const auto& row : fracs) {
    auto& counts = approx.counts.emplace_back();
    std::int64_t total = 0;
    for (const auto& f : row) {
      counts.push_back(static_cast<int>(f.num * (d / f.den)));
      total += counts.back();
    }
    if (total != d) return std::nullopt;
  }
  approx.eta_achieved = 0.0;
  return approx;
}

double deviation(const Eigen::VectorXd& y, const std::vector<int>& counts, int K) {
  double dev = 0.0;
  for (Eigen::Index a = 0; a < y.size(); ++a) {
    dev = std::max(dev, std::abs(static_cast<double>(counts[static_cast<std::size_t>(a)]) / K - y(a)));
  }
  return dev;
}

}  // namespace

Eigen::VectorXd RationalApproximation::rational_flow(std::size_t i) const {
  const auto& c = counts.at(i);
  Eigen::VectorXd y(static_cast<Eigen::Index>(c.size()));
  for (std::size_t a = 0; a < c.size(); ++a) y(static_cast<Eigen::Index>(a)) = static_cast<double>(c[a]) / K;
  return y;
}

std::vector<int> largest_remainder(const Eigen::Ref<const Eigen::VectorXd>& flow, int K) {
  const auto n = static_cast<std::size_t>(flow.size());
  const double total = flow.sum();
  std::vector<int> counts(n);
  std::vector<double> frac(n);
  int assigned = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const double scaled = std::max(0.0, flow(static_cast<Eigen::Index>(a)) / total) * K;
    counts[a] = static_cast<int>(std::floor(scaled));
    frac[a] = scaled - counts[a];
    assigned += counts[a];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < K; i = (i + 1) % n) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

RationalApproximation rational_approximation(const std::vector<Eigen::VectorXd>& flows, double eta) {
  if (flows.empty()) throw Error(ErrorCode::kDomain, "no flows to approximate");
  for (const auto& y : flows) {
    if (y.size() != flows.front().size() || !y.allFinite() || y.minCoeff() < 0.0 ||
        std::abs(y.sum() - 1.0) > kMassTolerance) {
      throw Error(ErrorCode::kDomain, "flows to approximate must be unit-mass and of equal dimension");
    }
  }
  if (auto exact = exact_approximation(flows)) return *exact;
  if (!(eta > 0.0)) {
    throw Error(ErrorCode::kDomain, "flows are not rational with denominator <= 1e6; a positive eta is required");
  }

  const double limit = std::ceil(static_cast<double>(flows.front().size()) / eta);
  if (limit > 1e8) throw Error(ErrorCode::kResource, "eta too small for the approximation search");
  const int k_max = static_cast<int>(limit);
  for (int K = 1; K <= k_max; ++K) {
    RationalApproximation approx;
    approx.K = K;
    approx.flows = flows;
    bool ok = true;
    for (const auto& y : flows) {
      approx.counts.push_back(largest_remainder(y, K));
      const double dev = deviation(y, approx.counts.back(), K);
      approx.eta_achieved = std::max(approx.eta_achieved, dev);
      if (dev > eta) {
        ok = false;
        break;
      }
    }
    if (ok) return approx;
  }
  throw Error(ErrorCode::kInternal, "no K up to " + std::to_string(k_max) + " reaches eta");
}

InformationStructure build_direct_structure(const CongestionGame& game, const FiniteOutcome& bcwe,
                                            const RationalApproximation& approx) {
  if (bcwe.num_states() != game.num_states()) {
    throw Error(ErrorCode::kConsistency, "outcome and game disagree on the number of states");
  }
  std::vector<std::vector<InformationStructure::RotationAtom>> per_state(game.num_states());
  for (std::size_t s = 0; s < game.num_states(); ++s) {
    for (const auto& atom : bcwe.atoms(s)) {
      std::size_t i = 0;
      while (i < approx.flows.size() &&
             (approx.flows[i].size() != atom.flow.size() ||
              (approx.flows[i] - atom.flow.entries()).cwiseAbs().maxCoeff() > 1e-9)) {
        ++i;
      }
      if (i == approx.flows.size()) {
        throw Error(ErrorCode::kConsistency, "support flow in state " + game.states()[s] +
                                                 " is not covered by the rational approximation");
      }
      auto& atoms = per_state[s];
      auto it = std::find_if(atoms.begin(), atoms.end(),
                             [&](const auto& r) { return r.counts == approx.counts[i]; });
      if (it == atoms.end()) {
        atoms.push_back({approx.counts[i], atom.prob});
      } else {
        it->prob += atom.prob;
      }
    }
  }
  return InformationStructure::rotation_symmetric(game.action_labels(), game.states(), approx.K,
                                                  std::move(per_state));
}

InterimFlowProfile obedient_profile(const InformationStructure& structure,
                                    const std::vector<std::string>& actions) {
  if (!structure.is_direct(actions)) {
    throw Error(ErrorCode::kDomain, "obedient profile needs a direct structure (type sets = actions)");
  }
  InterimFlowProfile profile;
  const auto n = static_cast<Eigen::Index>(actions.size());
  for (std::size_t k = 0; k < structure.num_populations(); ++k) {
    auto& types = profile.flows.emplace_back();
    for (Eigen::Index t = 0; t < n; ++t) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      y(t) = structure.population_sizes()[k];
      types.push_back(std::move(y));
    }
  }
  return profile;
}

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Halton point i mapped onto the unit simplex through sorted spacings, with a
// random shift per coordinate.
Eigen::VectorXd halton_simplex(std::uint64_t i, Eigen::Index n, const std::vector<double>& shift,
                               std::mt19937_64& rng) {
  std::vector<double> u(static_cast<std::size_t>(n - 1));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t d = 0; d < u.size(); ++d) {
    if (d < std::size(kPrimes)) {
      u[d] = std::fmod(radical_inverse(i, kPrimes[d]) + shift[d], 1.0);
    } else {
      u[d] = unif(rng);
    }
  }
  std::sort(u.begin(), u.end());
  Eigen::VectorXd y(n);
  double prev = 0.0;
  for (Eigen::Index a = 0; a + 1 < n; ++a) {
    y(a) = u[static_cast<std::size_t>(a)] - prev;
    prev = u[static_cast<std::size_t>(a)];
  }
  y(n - 1) = 1.0 - prev;
  return y;
}

}  // namespace

LipschitzEstimate estimate_modulus(const CongestionGame& game, const FlowFunctional& f,
                                   std::size_t sample_count, std::uint64_t seed) {
  if (sample_count < 2) throw Error(ErrorCode::kDomain, "estimate_modulus needs at least 2 samples");
  const auto n = static_cast<Eigen::Index>(game.num_actions());
  LipschitzEstimate est;
  auto ratio = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    const double dist = (y - z).cwiseAbs().maxCoeff();
    if (dist <= 0.0) return;
    for (std::size_t s = 0; s < game.num_states(); ++s) {
      const double diff = (f(y, s) - f(z, s)).cwiseAbs().maxCoeff();
      est.L = std::max(est.L, diff / dist);
    }
    ++est.sample_count;
  };
  if (n == 1) return est;

  auto rng = make_rng(seed, 0x11b);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shift(static_cast<std::size_t>(n - 1));
  for (auto& v : shift) v = unif(rng);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const Eigen::VectorXd y = halton_simplex(2 * i + 1, n, shift, rng);
    const Eigen::VectorXd z = halton_simplex(2 * i + 2, n, shift, rng);
    ratio(y, z);
    ratio(y, y + 1e-3 * (z - y));
  }

  const FlowGrid grid(10, static_cast<std::size_t>(n));
  if (grid.size() * static_cast<std::size_t>(n * n) <= 2'000'000) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Eigen::VectorXd y = grid.point(g);
      for (Eigen::Index from = 0; from < n; ++from) {
        if (grid.counts(g)[static_cast<std::size_t>(from)] == 0) continue;
        for (Eigen::Index to = 0; to < n; ++to) {
          if (to == from) continue;
          Eigen::VectorXd z = y;
          z(from) -= 0.1;
          z(to) += 0.1;
          ratio(y, z);
        }
      }
    }
  }
  return est;
}

LipschitzEstimate estimate_modulus(const CongestionGame& game, std::size_t sample_count,
                                   std::uint64_t seed) {
  const FlowFunctional family = [&game](const Eigen::VectorXd& y, std::size_t s) {
    const Eigen::VectorXd c = action_costs(game, y, s);
    const Eigen::MatrixXd outer = y * c.transpose();
    return Eigen::VectorXd(outer.reshaped());
  };
  return estimate_modulus(game, family, sample_count, seed);
}

double smallest_positive_flow(const FiniteOutcome& bcwe) {
  double eps0 = 1.0;
  for (const auto& y : bcwe.support()) {
    for (Eigen::Index a = 0; a < y.size(); ++a) {
      if (y(a) > 1e-12) eps0 = std::min(eps0, y(a));
    }
  }
  return eps0;
}

double epsilon_bound(const RationalApproximation& approx, const FiniteOutcome& bcwe,
                     const LipschitzEstimate& lip) {
  if (approx.eta_achieved == 0.0 || lip.L == 0.0) return 0.0;
  const double eps0 = smallest_positive_flow(bcwe);
  if (approx.eta_achieved > eps0 / 2.0) {
    throw Error(ErrorCode::kDomain, "approximation error " + std::to_string(approx.eta_achieved) +
                                        " exceeds half the smallest positive flow " + std::to_string(eps0) +
                                        "; use a larger K (smaller eta)");
  }
  return 4.0 * lip.L * approx.eta_achieved / eps0;
}

}  // namespace bcwe

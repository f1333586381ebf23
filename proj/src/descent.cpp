#include "bcwe/descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "bcwe/random.hpp"

namespace bcwe {

BlockPotential::BlockPotential(CongestionGame game, std::vector<double> block_mass,
                               std::vector<PotentialTerm> terms)
    : game_(std::move(game)), block_mass_(std::move(block_mass)), terms_(std::move(terms)) {
  block_weight_.assign(block_mass_.size(), 0.0);
  terms_of_.resize(block_mass_.size());
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& term = terms_[j];
    if (term.state >= game_.num_states()) throw Error(ErrorCode::kConsistency, "term state out of range");
    if (!(term.weight >= 0.0)) throw Error(ErrorCode::kConsistency, "negative term weight");
    for (std::size_t b : term.blocks) {
      if (b >= block_mass_.size()) throw Error(ErrorCode::kConsistency, "term block out of range");
      block_weight_[b] += term.weight;
      terms_of_[b].push_back(j);
    }
  }
}

Eigen::MatrixXd BlockPotential::totals(const Eigen::MatrixXd& flows) const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(num_actions(), static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    for (std::size_t b : terms_[j].blocks) t.col(static_cast<Eigen::Index>(j)) += flows.col(static_cast<Eigen::Index>(b));
  }
  return t;
}

Eigen::MatrixXd BlockPotential::gradient(const Eigen::MatrixXd& flows) const {
  const Eigen::MatrixXd t = totals(flows);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(num_actions(), static_cast<Eigen::Index>(num_blocks()));
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& term = terms_[j];
    if (term.weight == 0.0) continue;
    const Eigen::VectorXd c = term.weight * action_costs(game_, t.col(static_cast<Eigen::Index>(j)), term.state);
    for (std::size_t b : term.blocks) g.col(static_cast<Eigen::Index>(b)) += c;
  }
  return g;
}

double BlockPotential::value(const Eigen::MatrixXd& flows) const {
  const Eigen::MatrixXd t = totals(flows);
  double v = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    if (terms_[j].weight == 0.0) continue;
    v += terms_[j].weight * potential(game_, t.col(static_cast<Eigen::Index>(j)), terms_[j].state);
  }
  return v;
}

Eigen::MatrixXd BlockPotential::uniform_flows() const {
  Eigen::MatrixXd y(num_actions(), static_cast<Eigen::Index>(num_blocks()));
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    y.col(static_cast<Eigen::Index>(b)).setConstant(block_mass_[b] / static_cast<double>(num_actions()));
  }
  return y;
}

void BlockPotential::check_flows(const Eigen::MatrixXd& flows) const {
  if (flows.rows() != num_actions() || flows.cols() != static_cast<Eigen::Index>(num_blocks())) {
    throw Error(ErrorCode::kConsistency, "interim profile shape does not match the structure");
  }
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const auto col = flows.col(static_cast<Eigen::Index>(b));
    if (!col.allFinite() || col.minCoeff() < 0.0 || std::abs(col.sum() - block_mass_[b]) > kMassTolerance) {
      throw Error(ErrorCode::kDomain, "block " + std::to_string(b) + " is not a flow of mass " +
                                          std::to_string(block_mass_[b]));
    }
  }
}

GapSummary gap_summary(const BlockPotential& potential, const Eigen::MatrixXd& flows,
                       const Eigen::MatrixXd& gradient) {
  GapSummary s;
  for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
    if (!potential.active(b)) continue;
    const auto col = static_cast<Eigen::Index>(b);
    const double best = gradient.col(col).minCoeff();
    s.duality_gap += flows.col(col).dot(gradient.col(col)) - potential.block_mass(b) * best;
    for (Eigen::Index a = 0; a < flows.rows(); ++a) {
      if (flows(a, col) > kSupportThreshold) s.max_slack = std::max(s.max_slack, gradient(a, col) - best);
    }
  }
  s.duality_gap = std::max(s.duality_gap, 0.0);
  return s;
}

namespace {

Eigen::Index argmin_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) < v(best)) best = i;
  }
  return best;
}

Eigen::MatrixXd initial_flows(const BlockPotential& potential, const DescentConfig& config) {
  Eigen::MatrixXd y = potential.uniform_flows();
  if (config.random_start) {
    auto rng = make_rng(config.seed, 0x5eed);
    for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
      if (!potential.active(b)) continue;
      y.col(static_cast<Eigen::Index>(b)) =
          random_simplex_point(rng, potential.num_actions(), potential.block_mass(b));
    }
    return y;
  }
  const Eigen::MatrixXd g = potential.gradient(y);
  for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
    if (!potential.active(b)) continue;
    const auto col = static_cast<Eigen::Index>(b);
    y.col(col).setZero();
    y(argmin_lowest(g.col(col)), col) = potential.block_mass(b);
  }
  return y;
}

// Moves mass from the costliest supported action of block b to its cheapest
// action, as far as the potential keeps decreasing along that direction.
void pairwise_step(const BlockPotential& potential, std::size_t b, Eigen::MatrixXd& flows,
                   Eigen::MatrixXd& totals) {
  const auto col = static_cast<Eigen::Index>(b);
  const auto& game = potential.game();
  const auto& terms = potential.terms();
  const auto& mine = potential.terms_of(b);

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(potential.num_actions());
  for (std::size_t j : mine) {
    if (terms[j].weight == 0.0) continue;
    cost += terms[j].weight * action_costs(game, totals.col(static_cast<Eigen::Index>(j)), terms[j].state);
  }
  const Eigen::Index to = argmin_lowest(cost);
  Eigen::Index from = -1;
  for (Eigen::Index a = 0; a < cost.size(); ++a) {
    if (flows(a, col) > 0.0 && (from < 0 || cost(a) > cost(from))) from = a;
  }
  if (from < 0 || from == to || !(cost(from) > cost(to))) return;

  const double room = flows(from, col);
  // Directional derivative of the potential after shifting `d` from `from` to `to`.
  auto slope = [&](double d) {
    double s = 0.0;
    for (std::size_t j : mine) {
      if (terms[j].weight == 0.0) continue;
      Eigen::VectorXd y = totals.col(static_cast<Eigen::Index>(j));
      y(to) += d;
      y(from) -= d;
      const Eigen::VectorXd c = action_costs(game, y, terms[j].state);
      s += terms[j].weight * (c(to) - c(from));
    }
    return s;
  };

  double step = room;
  const double f_room = slope(room);
  if (f_room > 0.0) {
    // Illinois regula falsi on the nondecreasing slope, bracketed by [lo, hi].
    // lo always has slope <= 0, so stepping to lo never raises the potential.
    double lo = 0.0;
    double hi = room;
    double f_lo = cost(to) - cost(from);
    double f_hi = f_room;
    const double scale = std::abs(cost(to)) + std::abs(cost(from));
    int side = 0;
    for (int it = 0; it < 100 && hi - lo > 1e-16 * room; ++it) {
      double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
      const double fx = slope(x);
      if (std::abs(fx) <= 1e-15 * scale) {
        lo = x;
        break;
      }
      if (fx > 0.0) {
        hi = x;
        f_hi = fx;
        if (side == 1) f_lo *= 0.5;
        side = 1;
      } else {
        lo = x;
        f_lo = fx;
        if (side == -1) f_hi *= 0.5;
        side = -1;
      }
    }
    step = lo;
  }
  if (step <= 0.0) return;

  flows(to, col) += step;
  if (step >= room) {
    flows(from, col) = 0.0;
  } else {
    flows(from, col) -= step;
  }
  for (std::size_t j : mine) {
    totals(to, static_cast<Eigen::Index>(j)) += step;
    totals(from, static_cast<Eigen::Index>(j)) -= step;
  }
}

}  // namespace

DescentResult minimize_potential(const BlockPotential& potential, const DescentConfig& config,
                                 std::optional<Eigen::MatrixXd> start) {
  Eigen::MatrixXd y = start ? std::move(*start) : initial_flows(potential, config);
  potential.check_flows(y);
  for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
    if (!potential.active(b)) {
      y.col(static_cast<Eigen::Index>(b)).setConstant(potential.block_mass(b) /
                                                      static_cast<double>(potential.num_actions()));
    }
  }

  DescentResult result;
  double best_gap = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd totals = potential.totals(y);

  for (long t = 0;; ++t) {
    const Eigen::MatrixXd g = potential.gradient(y);
    const GapSummary gaps = gap_summary(potential, y, g);
    best_gap = std::min(best_gap, gaps.gap());
    if (config.record_trace) result.potential_trace.push_back(potential.value(y));
    if (gaps.gap() <= config.target_gap) {
      result.flows = std::move(y);
      result.gaps = gaps;
      result.iterations = t;
      result.potential = potential.value(result.flows);
      return result;
    }
    if (t >= config.max_iters) {
      throw ConvergenceError("no equilibrium within " + std::to_string(config.max_iters) +
                                 " iterations (best gap " + std::to_string(best_gap) + ")",
                             best_gap);
    }

    if (config.step_rule == StepRule::kOpenLoop) {
      const double gamma = 2.0 / (static_cast<double>(t) + 2.0);
      for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
        if (!potential.active(b)) continue;
        const auto col = static_cast<Eigen::Index>(b);
        const Eigen::Index vertex = argmin_lowest(g.col(col));
        y.col(col) *= 1.0 - gamma;
        y(vertex, col) += gamma * potential.block_mass(b);
      }
      totals = potential.totals(y);
    } else {
      for (std::size_t b = 0; b < potential.num_blocks(); ++b) {
        if (potential.active(b)) pairwise_step(potential, b, y, totals);
      }
      // Resynchronize to keep incremental updates from drifting.
      totals = potential.totals(y);
    }
  }
}

}  // namespace bcwe

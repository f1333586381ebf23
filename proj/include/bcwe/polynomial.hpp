#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/errors.hpp"

namespace bcwe {

/// Dense univariate polynomial, constant term first.
template <typename Scalar>
class Polynomial {
 public:
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Polynomial() : coefficients_(Coefficients::Zero(1)) {}
  explicit Polynomial(Coefficients coefficients) : coefficients_(std::move(coefficients)) {
    if (coefficients_.size() == 0) coefficients_ = Coefficients::Zero(1);
  }
  Polynomial(std::initializer_list<Scalar> coefficients)
      : Polynomial(Coefficients(Eigen::Map<const Coefficients>(
            coefficients.begin(), static_cast<Eigen::Index>(coefficients.size())))) {}

  const Coefficients& coefficients() const { return coefficients_; }

  /// Formal degree (trailing zero coefficients are counted).
  Eigen::Index degree() const { return coefficients_.size() - 1; }

  Scalar operator()(const Scalar& x) const {
    Scalar acc = coefficients_(degree());
    for (Eigen::Index i = degree() - 1; i >= 0; --i) acc = acc * x + coefficients_(i);
    return acc;
  }

  Polynomial derivative() const {
    if (degree() == 0) return Polynomial();
    Coefficients d(degree());
    for (Eigen::Index i = 1; i <= degree(); ++i) d(i - 1) = coefficients_(i) * Scalar(i);
    return Polynomial(std::move(d));
  }

  /// Antiderivative vanishing at 0.
  Polynomial antiderivative() const {
    Coefficients a = Coefficients::Zero(coefficients_.size() + 1);
    for (Eigen::Index i = 0; i <= degree(); ++i) a(i + 1) = coefficients_(i) / Scalar(i + 1);
    return Polynomial(std::move(a));
  }

  bool is_zero(const Scalar& tol) const {
    return (coefficients_.array().abs() <= tol).all();
  }

  Polynomial& operator+=(const Polynomial& other) {
    if (other.coefficients_.size() > coefficients_.size()) {
      Coefficients grown = Coefficients::Zero(other.coefficients_.size());
      grown.head(coefficients_.size()) = coefficients_;
      coefficients_ = std::move(grown);
    }
    coefficients_.head(other.coefficients_.size()) += other.coefficients_;
    return *this;
  }

  friend Polynomial operator*(const Scalar& s, Polynomial p) {
    p.coefficients_ *= s;
    return p;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.coefficients_ == b.coefficients_;
  }

 private:
  Coefficients coefficients_;
};

/// Real roots of p in [lo, hi], ascending. The zero polynomial reports no roots.
/// Roots are isolated between consecutive critical points, where p is monotone.
inline std::vector<double> real_roots(const Polynomial<double>& p, double lo, double hi) {
  std::vector<double> roots;
  if (p.is_zero(0.0) || hi < lo) return roots;
  Eigen::Index deg = p.degree();
  while (deg > 0 && p.coefficients()(deg) == 0.0) --deg;
  if (deg == 0) return roots;
  if (deg == 1) {
    const double r = -p.coefficients()(0) / p.coefficients()(1);
    if (r >= lo && r <= hi) roots.push_back(r);
    return roots;
  }
  std::vector<double> knots{lo};
  for (double c : real_roots(p.derivative(), lo, hi)) knots.push_back(c);
  knots.push_back(hi);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double a = knots[i];
    double b = knots[i + 1];
    double fa = p(a);
    const double fb = p(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (i + 2 == knots.size() && fb == 0.0) {
      roots.push_back(b);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0)) continue;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      const double fm = p(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || r - unique.back() > 1e-12) unique.push_back(r);
  }
  return unique;
}

/// Minimum of p over [lo, hi] (attained at an endpoint or a critical point).
inline double minimum_on(const Polynomial<double>& p, double lo, double hi) {
  double m = std::min(p(lo), p(hi));
  for (double c : real_roots(p.derivative(), lo, hi)) m = std::min(m, p(c));
  return m;
}

/// Continuous piecewise polynomial on [0, 1]. Pieces are polynomials in the
/// global variable x (not shifted per interval). Outside [0, 1] the first and
/// last pieces are extended, which gives the open neighbourhood needed for
/// one-sided finite differences at the simplex boundary.
template <typename Scalar>
class PiecewisePolynomial {
 public:
  static constexpr double kContinuityTolerance = 1e-12;

  PiecewisePolynomial() : PiecewisePolynomial({Scalar(0), Scalar(1)}, {Polynomial<Scalar>()}) {}

  PiecewisePolynomial(std::vector<Scalar> breakpoints, std::vector<Polynomial<Scalar>> pieces)
      : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    validate();
    cumulative_.assign(breakpoints_.size(), Scalar(0));
    antiderivatives_.reserve(pieces_.size());
    for (const auto& piece : pieces_) antiderivatives_.push_back(piece.antiderivative());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      cumulative_[i + 1] = cumulative_[i] + antiderivatives_[i](breakpoints_[i + 1]) -
                           antiderivatives_[i](breakpoints_[i]);
    }
  }

  static PiecewisePolynomial constant(const Scalar& c) {
    return PiecewisePolynomial({Scalar(0), Scalar(1)}, {Polynomial<Scalar>{c}});
  }

  const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
  const std::vector<Polynomial<Scalar>>& pieces() const { return pieces_; }

  std::size_t piece_index(const Scalar& x) const {
    const auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, x);
    return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
  }

  Scalar operator()(const Scalar& x) const { return pieces_[piece_index(x)](x); }

  /// Integral from 0 to x.
  Scalar integral(const Scalar& x) const {
    const std::size_t i = piece_index(x);
    const Scalar left = i == 0 ? Scalar(0) : breakpoints_[i];
    return cumulative_[i] + antiderivatives_[i](x) - antiderivatives_[i](left);
  }

  /// Weighted sum on the merged breakpoint grid.
  static PiecewisePolynomial weighted_sum(const std::vector<std::pair<Scalar, const PiecewisePolynomial*>>& terms) {
    std::vector<Scalar> grid;
    for (const auto& [w, curve] : terms) {
      grid.insert(grid.end(), curve->breakpoints_.begin(), curve->breakpoints_.end());
    }
    std::sort(grid.begin(), grid.end());
    std::vector<Scalar> merged;
    for (const auto& b : grid) {
      if (merged.empty() || b - merged.back() > Scalar(1e-15)) merged.push_back(b);
    }
    if (merged.size() < 2) return constant(Scalar(0));
    merged.back() = Scalar(1);
    std::vector<Polynomial<Scalar>> pieces(merged.size() - 1);
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
      const Scalar mid = (merged[i] + merged[i + 1]) / Scalar(2);
      for (const auto& [w, curve] : terms) pieces[i] += w * curve->pieces_[curve->piece_index(mid)];
    }
    return PiecewisePolynomial(std::move(merged), std::move(pieces));
  }

 private:
  void validate() const {
    using std::abs;
    if (breakpoints_.size() < 2 || pieces_.size() + 1 != breakpoints_.size()) {
      throw Error(ErrorCode::kCurveBreakpoints,
                  "need n+1 breakpoints for n pieces (got " + std::to_string(breakpoints_.size()) +
                      " breakpoints, " + std::to_string(pieces_.size()) + " pieces)");
    }
    if (breakpoints_.front() != Scalar(0) || breakpoints_.back() != Scalar(1)) {
      throw Error(ErrorCode::kCurveBreakpoints, "breakpoints must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i - 1] < breakpoints_[i])) {
        throw Error(ErrorCode::kCurveBreakpoints, "breakpoints must be strictly increasing");
      }
    }
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      const Scalar& b = breakpoints_[i];
      if (abs(pieces_[i - 1](b) - pieces_[i](b)) > Scalar(kContinuityTolerance)) {
        throw Error(ErrorCode::kCurveDiscontinuous,
                    "pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                        " disagree at breakpoint " + std::to_string(static_cast<double>(b)));
      }
    }
  }

  std::vector<Scalar> breakpoints_;
  std::vector<Polynomial<Scalar>> pieces_;
  std::vector<Polynomial<Scalar>> antiderivatives_;
  std::vector<Scalar> cumulative_;
};

using CostCurve = PiecewisePolynomial<double>;

/// Monotonicity of a cost curve on [0, 1], checked piece by piece through the
/// minimum of the derivative polynomial.
enum class Monotonicity { kNone, kNondecreasing, kStrictlyIncreasing };

inline Monotonicity monotonicity(const CostCurve& curve, double tol = 1e-12) {
  bool strict = true;
  const auto& b = curve.breakpoints();
  for (std::size_t i = 0; i < curve.pieces().size(); ++i) {
    const Polynomial<double> slope = curve.pieces()[i].derivative();
    if (minimum_on(slope, b[i], b[i + 1]) < -tol) return Monotonicity::kNone;
    // A polynomial with nonnegative derivative is strictly increasing unless the
    // derivative vanishes identically.
    if (slope.is_zero(tol)) strict = false;
  }
  return strict ? Monotonicity::kStrictlyIncreasing : Monotonicity::kNondecreasing;
}

}  // namespace bcwe

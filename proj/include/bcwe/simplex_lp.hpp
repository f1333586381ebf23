#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcwe/errors.hpp"

namespace bcwe {

/// minimize c'x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector c;
  Matrix a_eq;
  Vector b_eq;
  Matrix a_le;
  Vector b_le;
};

template <typename Scalar>
struct LpSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective;
  long pivots = 0;
};

/// Two-phase dense tableau simplex with Bland's rule (lowest-index entering
/// column, lowest-index leaving basic variable on ratio ties), which rules out
/// cycling on degenerate vertices.
///
/// Throws InfeasibleError when phase one cannot remove the artificial mass;
/// its certificate y satisfies y'A <= 0 on every column and y'b > 0 for the
/// stacked rows [A_eq; A_le] (slack columns included).
template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp, Scalar tol = Scalar(1e-11)) {
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  using Vector = typename LinearProgram<Scalar>::Vector;

  const Eigen::Index n = lp.c.size();
  const Eigen::Index m_eq = lp.a_eq.rows();
  const Eigen::Index m_le = lp.a_le.rows();
  const Eigen::Index m = m_eq + m_le;
  if ((m_eq > 0 && lp.a_eq.cols() != n) || (m_le > 0 && lp.a_le.cols() != n) ||
      lp.b_eq.size() != m_eq || lp.b_le.size() != m_le) {
    throw Error(ErrorCode::kDomain, "linear program dimensions are inconsistent");
  }

  // Row i gets its initial basic column: the slack when it is a <= row with
  // nonnegative right-hand side, an artificial otherwise.
  std::vector<bool> negated(static_cast<std::size_t>(m), false);
  std::vector<bool> needs_artificial(static_cast<std::size_t>(m), false);
  Eigen::Index num_art = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar rhs = i < m_eq ? lp.b_eq(i) : lp.b_le(i - m_eq);
    negated[i] = rhs < Scalar(0);
    needs_artificial[i] = i < m_eq || negated[i];
    if (needs_artificial[i]) ++num_art;
  }

  const Eigen::Index slack0 = n;
  const Eigen::Index art0 = n + m_le;
  const Eigen::Index cols = n + m_le + num_art;
  const Eigen::Index rhs = cols;
  Matrix t = Matrix::Zero(m, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  std::vector<Eigen::Index> initial(static_cast<std::size_t>(m));
  Eigen::Index next_art = art0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar sign = negated[i] ? Scalar(-1) : Scalar(1);
    if (i < m_eq) {
      t.row(i).head(n) = sign * lp.a_eq.row(i);
      t(i, rhs) = sign * lp.b_eq(i);
    } else {
      t.row(i).head(n) = sign * lp.a_le.row(i - m_eq);
      t(i, slack0 + i - m_eq) = sign;
      t(i, rhs) = sign * lp.b_le(i - m_eq);
    }
    if (needs_artificial[i]) {
      t(i, next_art) = Scalar(1);
      basis[i] = next_art++;
    } else {
      basis[i] = slack0 + i - m_eq;
    }
    initial[i] = basis[i];
  }

  long pivots = 0;
  auto pivot = [&](Eigen::Index r, Eigen::Index c) {
    t.row(r) /= t(r, c);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != r && t(i, c) != Scalar(0)) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[r] = c;
    ++pivots;
  };

  // Runs simplex iterations for cost vector `cost` over columns [0, allowed).
  auto optimize = [&](const Vector& cost, Eigen::Index allowed) {
    for (;;) {
      if (pivots > 10'000'000) throw Error(ErrorCode::kInternal, "simplex pivot limit exceeded");
      Vector duals = Vector::Zero(m);
      for (Eigen::Index i = 0; i < m; ++i) duals(i) = cost(basis[i]);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        const Scalar reduced = cost(j) - duals.dot(t.col(j));
        if (reduced < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      Scalar best_ratio = Scalar(0);
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, enter) <= tol) continue;
        const Scalar ratio = t(i, rhs) / t(i, enter);
        if (leave < 0 || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw Error(ErrorCode::kInternal, "linear program is unbounded");
      pivot(leave, enter);
    }
  };

  if (num_art > 0) {
    Vector phase1 = Vector::Zero(cols);
    phase1.tail(num_art).setOnes();
    optimize(phase1, cols);
    Scalar residual = Scalar(0);
    for (Eigen::Index i = 0; i < m; ++i) residual += phase1(basis[i]) * t(i, rhs);
    const Scalar scale = Scalar(1) + (lp.b_eq.size() ? lp.b_eq.cwiseAbs().maxCoeff() : Scalar(0)) +
                         (lp.b_le.size() ? lp.b_le.cwiseAbs().maxCoeff() : Scalar(0));
    if (residual > tol * scale * Scalar(100)) {
      // y' = c_B' B^{-1}; B^{-1} sits in the initial identity columns.
      Vector y(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        Scalar yi = Scalar(0);
        for (Eigen::Index r = 0; r < m; ++r) yi += phase1(basis[r]) * t(r, initial[i]);
        y(i) = negated[i] ? -yi : yi;
      }
      // Phase one maximizes y'b over y'A <= 0; report the Farkas direction.
      throw InfeasibleError("linear program is infeasible (phase-one residual " +
                                std::to_string(static_cast<double>(residual)) + ")",
                            static_cast<double>(residual),
                            y.template cast<double>());
    }
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant and keep an artificial fixed at zero.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (basis[i] < art0) continue;
      for (Eigen::Index j = 0; j < art0; ++j) {
        if (t(i, j) > tol || t(i, j) < -tol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Vector cost = Vector::Zero(cols);
  cost.head(n) = lp.c;
  optimize(cost, art0);

  LpSolution<Scalar> sol;
  sol.x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < n) sol.x(basis[i]) = t(i, rhs) < Scalar(0) ? Scalar(0) : t(i, rhs);
  }
  sol.objective = lp.c.dot(sol.x);
  sol.pivots = pivots;
  return sol;
}

}  // namespace bcwe

#include "doctest.h"

#include "bcwe/errors.hpp"
#include "bcwe/simplex_lp.hpp"
#include "generators.hpp"
#include "oracles/rational_lp.hpp"

using namespace bcwe;
using Lp = LinearProgram<double>;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

oracle::RationalMatrix to_rational(const Eigen::MatrixXd& m) {
  oracle::RationalMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(oracle::Rational(static_cast<long>(m(i, j))));
  }
  return out;
}

std::vector<oracle::Rational> to_rational(const Eigen::VectorXd& v) {
  std::vector<oracle::Rational> out;
  for (double x : v) out.emplace_back(static_cast<long>(x));
  return out;
}

void check_farkas(const Lp& lp, const InfeasibleError& e) {
  const Eigen::VectorXd& y = e.certificate();
  const Eigen::Index m_eq = lp.a_eq.rows();
  REQUIRE(y.size() == m_eq + lp.a_le.rows());
  Eigen::RowVectorXd ya = Eigen::RowVectorXd::Zero(lp.c.size());
  double yb = 0.0;
  if (m_eq > 0) {
    ya += y.head(m_eq).transpose() * lp.a_eq;
    yb += y.head(m_eq).dot(lp.b_eq);
  }
  if (lp.a_le.rows() > 0) {
    ya += y.tail(lp.a_le.rows()).transpose() * lp.a_le;
    yb += y.tail(lp.a_le.rows()).dot(lp.b_le);
    // Slack columns are unit vectors.
    CHECK(y.tail(lp.a_le.rows()).maxCoeff() <= 1e-9);
  }
  CHECK(ya.maxCoeff() <= 1e-9);
  CHECK(yb > 1e-9);
}

}  // namespace

TEST_SUITE("simplex_lp") {
  TEST_CASE("textbook optimum") {
    Lp lp;
    lp.c = Eigen::Vector2d(-1, -1);
    lp.a_le = mat({{1, 2}, {3, 1}});
    lp.b_le = Eigen::Vector2d(4, 6);
    const auto sol = solve_lp(lp);
    CHECK(sol.objective == doctest::Approx(-14.0 / 5).epsilon(1e-12));
    CHECK(sol.x(0) == doctest::Approx(8.0 / 5));
    CHECK(sol.x(1) == doctest::Approx(6.0 / 5));
  }

  TEST_CASE("Bland's rule terminates on a cycling-prone degenerate program") {
    Lp lp;
    lp.c = Eigen::Vector4d(-0.75, 20, -0.5, 6);
    lp.a_le = mat({{0.25, -8, -1, 9}, {0.5, -12, -0.5, 3}, {0, 0, 1, 0}});
    lp.b_le = Eigen::Vector3d(0, 0, 1);
    const auto sol = solve_lp(lp);
    CHECK(sol.objective == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(sol.pivots < 100);
  }

  TEST_CASE("infeasible programs carry a Farkas certificate") {
    Lp lp;
    lp.c = Eigen::Vector2d(0, 0);
    lp.a_eq = mat({{1, 1}});
    lp.b_eq = Eigen::VectorXd::Constant(1, 1.0);
    lp.a_le = mat({{1, 1}});
    lp.b_le = Eigen::VectorXd::Constant(1, 0.5);
    try {
      solve_lp(lp);
      FAIL("expected INFEASIBLE");
    } catch (const InfeasibleError& e) {
      CHECK(e.code() == ErrorCode::kInfeasible);
      CHECK(e.residual() > 0.0);
      check_farkas(lp, e);
    }
  }

  TEST_CASE("negative right-hand sides are normalized") {
    // x >= 2 written as -x <= -2; min x.
    Lp lp;
    lp.c = Eigen::VectorXd::Ones(1);
    lp.a_le = mat({{-1}});
    lp.b_le = Eigen::VectorXd::Constant(1, -2.0);
    CHECK(solve_lp(lp).objective == doctest::Approx(2.0));
  }

  TEST_CASE("unbounded and malformed programs") {
    Lp lp;
    lp.c = Eigen::Vector2d(-1, 0);
    lp.a_le = mat({{1, -1}});
    lp.b_le = Eigen::VectorXd::Constant(1, 1.0);
    try {
      solve_lp(lp);
      FAIL("expected INTERNAL");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInternal);
    }
    Lp bad = lp;
    bad.b_le = Eigen::Vector2d(1, 1);
    CHECK_THROWS_AS(solve_lp(bad), Error);
  }

  TEST_CASE("random integer programs agree with exact vertex enumeration") {
    gen::Rng rng(31);
    int feasible = 0;
    int infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const Eigen::Index n = gen::integer(rng, 2, 4);
      const Eigen::Index m_eq = gen::integer(rng, 0, 1);
      const Eigen::Index m_le = gen::integer(rng, 1, 2);
      Lp lp;
      lp.c.resize(n);
      for (auto& v : lp.c) v = gen::integer(rng, -4, 4);
      lp.a_eq.resize(m_eq, n);
      lp.b_eq.resize(m_eq);
      for (Eigen::Index i = 0; i < m_eq; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) lp.a_eq(i, j) = gen::integer(rng, -2, 3);
        lp.b_eq(i) = gen::integer(rng, -2, 4);
      }
      // Last <= row bounds the feasible set.
      lp.a_le.resize(m_le + 1, n);
      lp.b_le.resize(m_le + 1);
      for (Eigen::Index i = 0; i < m_le; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) lp.a_le(i, j) = gen::integer(rng, -3, 3);
        lp.b_le(i) = gen::integer(rng, -2, 5);
      }
      lp.a_le.row(m_le).setOnes();
      lp.b_le(m_le) = 6;

      const auto exact = oracle::enumerate_vertices(oracle::standard_form(
          to_rational(lp.a_eq), to_rational(lp.b_eq), to_rational(lp.a_le), to_rational(lp.b_le), to_rational(lp.c)));
      if (exact) {
        ++feasible;
        const auto sol = solve_lp(lp);
        CHECK(sol.objective == doctest::Approx(exact->value.convert_to<double>()).epsilon(1e-9));
        if (m_eq > 0) CHECK(((lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff()) <= 1e-9);
        CHECK((lp.a_le * sol.x - lp.b_le).maxCoeff() <= 1e-9);
        CHECK(sol.x.minCoeff() >= 0.0);
      } else {
        ++infeasible;
        try {
          solve_lp(lp);
          FAIL("expected INFEASIBLE");
        } catch (const InfeasibleError& e) {
          check_farkas(lp, e);
        }
      }
    }
    CHECK(feasible > 50);
    CHECK(infeasible > 10);
  }
}

#include <doctest.h>

#include "phlqg/kyp.hpp"
#include "test_util.hpp"

using namespace phlqg;
using phlqg::test::mat;
using phlqg::test::random_matrix;
using phlqg::test::rel_diff;

namespace {

// [[2X, 1 - X], [1 - X, 0]]
ReducedKypProblem scalar_problem() {
  const Matrix one = Matrix::Ones(1, 1);
  return build_reduced_kyp(-one, one, Matrix(0, 1), one, Matrix(1, 0), one, KypVariant::Index1);
}

// Random controllable instance with a known feasible point Q11 and S = 0:
// A11 = (J - R) Q11, C1 = B1^T Q11.
ReducedKypProblem random_problem(Eigen::Index r, Eigen::Index m) {
  const Matrix G = random_matrix(r, r), H = random_matrix(r, r);
  const Matrix J = G - G.transpose(), R = H * H.transpose() + 0.1 * Matrix::Identity(r, r);
  const Matrix Q = phlqg::test::random_spd(r);
  const Matrix B1 = random_matrix(r, m);
  return build_reduced_kyp((J - R) * Q, B1, Matrix(0, m), B1.transpose() * Q, Matrix(m, 0), Q,
                           KypVariant::Index1);
}

}  // namespace

TEST_SUITE("kyp") {
  TEST_CASE("scalar blocks") {
    const ReducedKypProblem p = scalar_problem();
    const Matrix X = Matrix::Constant(1, 1, 0.25);
    CHECK(rel_diff(kyp_matrix(p, X), mat({{0.5, 0.75}, {0.75, 0}})) == 0.0);
    CHECK(p.S_block.norm() == 0.0);
    CHECK(p.quad_extra.norm() == 0.0);
  }

  TEST_CASE("general variant with C1 = 0 has the index-1 shape") {
    const Matrix A = -Matrix::Identity(2, 2), B1 = random_matrix(2, 1);
    const Matrix C1 = Matrix::Zero(1, 2);
    // C2 B2 = -1/4 keeps S = 3/8 > 0, so Q11 = 0 is feasible
    const ReducedKypProblem g = build_reduced_kyp(A, B1, Matrix::Ones(1, 1), C1, Matrix::Constant(1, 1, -0.25),
                                                  Matrix::Zero(2, 2), KypVariant::General);
    CHECK(g.S_block(0, 0) == doctest::Approx(0.375));
    CHECK(g.quad_extra.norm() == 0.0);
    CHECK(g.cross_extra.norm() == 0.0);
  }

  TEST_CASE("infeasible Q11 is rejected") {
    const Matrix one = Matrix::Ones(1, 1);
    CHECK_THROWS_AS(build_reduced_kyp(-one, one, Matrix(0, 1), one, Matrix(1, 0), 2.0 * one, KypVariant::Index1),
                    Error);
  }

  TEST_CASE("scalar maximal solution") {
    const ReducedKypProblem p = scalar_problem();
    const Matrix X = solve_max(p, 1e-12);
    CHECK(std::abs(X(0, 0) - 1.0) < 2e-6);
    CHECK(std::abs(X(0, 0) - (1.0 + std::sqrt(2e-12))) < 1e-9);
    CHECK(lmi_residual(p, X) >= -1e-6);
    CHECK(lmi_residual(p, p.Q11) >= -1e-7 * lmi_scale(p, p.Q11));
    CHECK(lmi_residual(p, p.Q11 + 10.0 * Matrix::Identity(1, 1)) < 0);
  }

  TEST_CASE("zero data gives zero") {
    const Matrix one = Matrix::Ones(1, 1);
    const ReducedKypProblem p = build_reduced_kyp(-one, Matrix::Zero(1, 1), Matrix(0, 1), Matrix::Zero(1, 1),
                                                  Matrix(1, 0), one, KypVariant::Index1);
    const Matrix X = solve_max(p, 1e-12);
    CHECK(X.norm() == 0.0);
  }

  TEST_CASE("decoupled 2x2 instance") {
    const Matrix A = mat({{-1, 0}, {0, -2}}), B1 = mat({{1}, {0}}), C1 = mat({{1, 0}});
    const ReducedKypProblem p = build_reduced_kyp(A, B1, Matrix(0, 1), C1, Matrix(1, 0), Matrix::Identity(2, 2),
                                                  KypVariant::Index1);
    KypDiagnostics d;
    const Matrix X = solve_max(p, 1e-12, &d);
    CHECK(d.controllable_dim == 1);
    CHECK(std::abs(X(0, 0) - 1.0) < 2e-6);
    CHECK(std::abs(X(0, 1)) < 1e-12);
    CHECK(std::abs(X(1, 1)) < 1e-12);
  }

  TEST_CASE("maximality on random controllable problems") {
    for (int trial = 0; trial < 5; ++trial) {
      const ReducedKypProblem p = random_problem(4, 2);
      KypDiagnostics d;
      const Matrix X = solve_max(p, 1e-8, &d);
      const double scale = lmi_scale(p, X);
      CHECK(d.controllable_dim == 4);
      CHECK(d.lmi_min >= -10 * 1e-8 * scale);
      CHECK((X - X.transpose()).norm() == 0.0);
      // dominates the known feasible point
      CHECK(lambda_min_sym(X - p.Q11) >= -1e-6 * scale);
      for (int k = 0; k < 20; ++k) {
        const Matrix G = random_matrix(4, 1);
        const Matrix D = 1e-3 * G * G.transpose() / G.squaredNorm();
        CHECK(lmi_residual(p, X + D, 1e-8) < 0);
        const double t = static_cast<double>(k) / 20.0;
        CHECK(lmi_residual(p, t * X + (1 - t) * p.Q11, 1e-8) >= -1e-6 * scale);
      }
    }
  }

  TEST_CASE("direct and dual routes agree") {
    CHECK(rel_diff(solve_max(scalar_problem()), solve_max_dual(scalar_problem())) < 1e-9);
    for (int trial = 0; trial < 5; ++trial) {
      const ReducedKypProblem p = random_problem(5, 2);
      CHECK(rel_diff(solve_max(p, 1e-10), solve_max_dual(p, 1e-10)) < 1e-6);
    }
  }

  TEST_CASE("eps must be positive") {
    CHECK_THROWS_AS(solve_max(scalar_problem(), 0.0), Error);
    CHECK_THROWS_AS(solve_max_dual(scalar_problem(), -1.0), Error);
  }

  TEST_CASE("controllable subspace staircase") {
    const Matrix A = mat({{-1, 1, 0}, {0, -2, 0}, {0, 0, -3}});
    const Matrix B = mat({{0}, {1}, {0}});
    const Matrix V = controllable_subspace(A, B);
    CHECK(V.cols() == 2);
    CHECK(V.row(2).norm() < 1e-14);
  }
}

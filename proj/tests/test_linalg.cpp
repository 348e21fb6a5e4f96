#include <doctest.h>

#include <algorithm>

#include "phlqg/linalg.hpp"
#include "test_util.hpp"

using namespace phlqg;
using phlqg::test::mat;
using phlqg::test::random_invertible;
using phlqg::test::random_matrix;
using phlqg::test::rel_diff;

namespace {

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("pinv small cases") {
    CHECK(rel_diff(pinv(mat({{2, 0}, {0, 0}})), mat({{0.5, 0}, {0, 0}})) < 1e-15);
    CHECK(rel_diff(pinv(Matrix::Identity(3, 3)), Matrix::Identity(3, 3)) < 1e-15);
    CHECK(rel_diff(pinv(mat({{1}, {1}})), mat({{0.5, 0.5}})) < 1e-15);
  }

  TEST_CASE("pinv satisfies the Penrose identities on mixed-rank matrices") {
    for (int rank : {30, 17, 5}) {
      const Matrix M = random_matrix(50, rank) * random_matrix(rank, 30);
      const Matrix P = pinv(M);
      CHECK((M * P * M - M).norm() <= 1e-10 * M.norm());
      CHECK((P * M * P - P).norm() <= 1e-10 * P.norm());
      CHECK(((M * P).transpose() - M * P).norm() <= 1e-10 * (M * P).norm());
      CHECK(((P * M).transpose() - P * M).norm() <= 1e-10 * (P * M).norm());
    }
  }

  TEST_CASE("psd_factor") {
    CHECK(psd_factor(Matrix::Zero(2, 2)).cols() == 0);
    CHECK(psd_factor(Matrix::Zero(2, 2)).rows() == 2);

    const Matrix L = psd_factor(Matrix::Identity(3, 3));
    CHECK(L.cols() == 3);
    CHECK(rel_diff(L * L.transpose(), Matrix::Identity(3, 3)) < 1e-14);

    const Matrix L1 = psd_factor(mat({{1, 1}, {1, 1}}));
    REQUIRE(L1.cols() == 1);
    CHECK(std::abs(std::abs(L1(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(L1(0, 0) - L1(1, 0)) < 1e-14);

    CHECK_THROWS_AS(psd_factor(mat({{1, 0}, {0, -1}})), Error);
    CHECK_THROWS_AS(psd_factor(mat({{1, 1}, {0, 1}})), Error);
  }

  TEST_CASE("psd_factor reconstruction and rank on random input") {
    for (int rank : {0, 3, 8}) {
      const Matrix G = random_matrix(8, rank);
      const Matrix M = G * G.transpose();
      const Matrix L = psd_factor(M);
      CHECK(L.cols() == rank);
      CHECK((L * L.transpose() - M).norm() <= 1e-10 * (1.0 + M.norm()));
    }
  }

  TEST_CASE("ordered_invariant_subspace examples") {
    auto neg = [](Complex l) { return l.real() < 0; };
    const auto s1 = ordered_invariant_subspace(mat({{-1, 0}, {0, 2}}), neg);
    CHECK(s1.count == 1);
    CHECK(std::abs(std::abs(s1.basis(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(s1.basis(1, 0)) < 1e-14);

    CHECK(ordered_invariant_subspace(mat({{0, -1}, {1, 0}}), neg).count == 0);

    const Matrix V = random_invertible(3);
    const Matrix M = V * mat({{-2, 0, 0}, {0, -1, 0}, {0, 0, 3}}) * V.inverse();
    const auto s3 = ordered_invariant_subspace(M, neg);
    CHECK(s3.count == 2);
    // span of the eigenvectors for -2 and -1
    const Matrix W = V.leftCols(2);
    const Matrix proj = s3.basis * s3.basis.transpose();
    CHECK((proj * W - W).norm() <= 1e-10 * W.norm());
  }

  TEST_CASE("ordered_invariant_subspace matches brute-force counts") {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix M = random_matrix(8, 8);
      auto sel = [](Complex l) { return l.real() < 0.1; };
      int expected = 0;
      for (const Complex& l : eigenvalues(M)) expected += sel(l) ? 1 : 0;
      const auto s = ordered_invariant_subspace(M, sel);
      CHECK(s.count == expected);
      const Matrix U = s.basis;
      CHECK((M * U - U * (U.transpose() * M * U)).norm() <= 1e-9 * M.norm());
      CHECK((U.transpose() * U - Matrix::Identity(s.count, s.count)).norm() < 1e-12);
    }
  }

  TEST_CASE("pencil_spectrum examples") {
    const PencilInfo a = pencil_spectrum(Matrix::Identity(2, 2), mat({{-1, 0}, {0, -3}}));
    CHECK(a.regular);
    CHECK(a.index == 0);
    REQUIRE(a.finite_eigenvalues.size() == 2);
    const auto ea = sorted(a.finite_eigenvalues);
    CHECK(std::abs(ea[0] - Complex(-3)) < 1e-12);
    CHECK(std::abs(ea[1] - Complex(-1)) < 1e-12);

    const PencilInfo b = pencil_spectrum(mat({{1, 0}, {0, 0}}), mat({{-1, 0}, {0, 1}}));
    CHECK(b.regular);
    CHECK(b.impulse_free);
    CHECK(b.index == 1);
    REQUIRE(b.finite_eigenvalues.size() == 1);
    CHECK(std::abs(b.finite_eigenvalues[0] - Complex(-1)) < 1e-12);

    const PencilInfo c = pencil_spectrum(mat({{0, 1}, {0, 0}}), Matrix::Identity(2, 2));
    CHECK(c.regular);
    CHECK_FALSE(c.impulse_free);
    CHECK(c.index == 2);
    CHECK(c.finite_eigenvalues.empty());
  }

  TEST_CASE("singular pencil is rejected") {
    const Matrix E = mat({{1, 0}, {0, 0}});
    const Matrix A = mat({{1, 0}, {0, 0}});
    const PencilInfo pi = pencil_spectrum(E, A);
    CHECK_FALSE(pi.regular);
  }

  TEST_CASE("pencil_spectrum is invariant under strict equivalence") {
    Matrix E = Matrix::Zero(5, 5);
    E.topLeftCorner(3, 3) = Matrix::Identity(3, 3);
    Matrix A = random_matrix(5, 5);
    A.bottomRightCorner(2, 2) += 4.0 * Matrix::Identity(2, 2);
    const Matrix P = random_invertible(5), Pt = random_invertible(5);
    const Matrix Pi = P.inverse();
    const PencilInfo p1 = pencil_spectrum(E, A);
    const PencilInfo p2 = pencil_spectrum(Pi * E * Pt, Pi * A * Pt);
    REQUIRE(p1.finite_eigenvalues.size() == p2.finite_eigenvalues.size());
    CHECK(p1.index == p2.index);
    const auto e1 = sorted(p1.finite_eigenvalues), e2 = sorted(p2.finite_eigenvalues);
    for (std::size_t i = 0; i < e1.size(); ++i) CHECK(std::abs(e1[i] - e2[i]) <= 1e-8 * (1 + std::abs(e1[i])));
  }

  TEST_CASE("Sylvester and Lyapunov solvers") {
    const Matrix A = phlqg::test::random_stable(5), B = phlqg::test::random_stable(3);
    const Matrix C = random_matrix(5, 3);
    const Matrix X = solve_sylvester(A, B, C);
    CHECK((A * X + X * B - C).norm() <= 1e-10 * C.norm());

    const Matrix Q = phlqg::test::random_spd(5);
    const Matrix P = solve_lyapunov(A, Q);
    CHECK((A.transpose() * P + P * A + Q).norm() <= 1e-10 * Q.norm());
    CHECK(lambda_min_sym(P) > 0);
  }

  TEST_CASE("rank helpers") {
    const Matrix M = random_matrix(6, 2) * random_matrix(2, 4);
    CHECK(numerical_rank(M) == 2);
    CHECK(null_space(M).cols() == 2);
    CHECK((M * null_space(M)).norm() < 1e-12 * M.norm());
    CHECK(range_space(M).cols() == 2);
    CHECK(block_diag(Matrix::Identity(2, 2), Matrix::Ones(1, 1)).rows() == 3);
  }
}

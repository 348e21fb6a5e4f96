#include <doctest.h>

#include "phlqg/benchmarks.hpp"
#include "phlqg/riccati.hpp"
#include "test_util.hpp"

using namespace phlqg;
using phlqg::test::mat;
using phlqg::test::random_invertible;
using phlqg::test::rel_diff;

namespace {

const double kS2 = std::sqrt(2.0);

DescriptorSystem scalar_sys() {
  const Matrix one = Matrix::Ones(1, 1);
  return {one, -one, one, one};
}

}  // namespace

TEST_SUITE("riccati") {
  TEST_CASE("solve_care scalar roots") {
    const Matrix one = Matrix::Ones(1, 1);
    CHECK(std::abs(solve_care(-one, one, one)(0, 0) - (kS2 - 1)) < 1e-12);
    CHECK(std::abs(solve_care(-one, one, 3.0 * one)(0, 0) - 1.0) < 1e-12);
    const Matrix A = phlqg::test::random_stable(4);
    CHECK(solve_care(A, Matrix::Identity(4, 4), Matrix::Zero(4, 4)).norm() < 1e-12);
  }

  TEST_CASE("solve_care residual and stability on random data") {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix A = phlqg::test::random_matrix(6, 6);
      const Matrix Bm = phlqg::test::random_matrix(6, 2), Cm = phlqg::test::random_matrix(3, 6);
      const Matrix G = Bm * Bm.transpose(), H = Cm.transpose() * Cm;
      const Matrix X = solve_care(A, G, H);
      const Matrix res = A.transpose() * X + X * A - X * G * X + H;
      CHECK(res.norm() <= 1e-9 * (1 + X.norm() * (A.norm() + X.norm() * G.norm())));
      for (const Complex& l : eigenvalues(A - G * X)) CHECK(l.real() < 0);
    }
  }

  TEST_CASE("scalar GAREs") {
    const DescriptorSystem s = scalar_sys();
    CHECK(std::abs(solve_control_gare(s)(0, 0) - (kS2 - 1)) < 1e-10);
    const GareSolutionPair o = solve_original_gares(s);
    CHECK(std::abs(o.P_c(0, 0) - (kS2 - 1)) < 1e-10);
    CHECK(std::abs(o.P_f(0, 0) - (kS2 - 1)) < 1e-10);
    CHECK(solve_filter_gare(phlqg::test::scalar_ph())(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("printed counterexample solutions") {
    const Counterexample ce = counterexample("phdae_mor");
    const double a = std::sqrt(1.0 + kS2), b = std::sqrt(2.0 + std::sqrt(5.0));
    const Matrix Pc = solve_control_gare(ce.sys);
    const Matrix expect = Eigen::Vector3d(1 / a, 1 / b, 0).asDiagonal();
    CHECK(rel_diff(ce.sys.E.transpose() * Pc, expect) < 1e-8);
    const Matrix Pf = solve_filter_gare(ce.ph);
    CHECK(rel_diff(Pf, ce.P_f) < 1e-14);
    CHECK(rel_diff(Pf, ce.ph.Q.inverse().transpose()) < 1e-14);

    const GareResiduals r = gare_residuals(ce.sys, ce.ph.R, ce.P_c, ce.P_f, GareVariant::Modified);
    CHECK(r.residual_c <= 1e-12 * r.scale_c);
    CHECK(r.residual_f <= 1e-12 * r.scale_f);
    CHECK(r.sym_c <= 1e-12 * r.scale_c);
    CHECK(r.sym_f <= 1e-12 * r.scale_f);
    CHECK(is_stabilizing(ce.sys, ce.P_c, GareSide::Control));
    CHECK(is_stabilizing(ce.sys, ce.P_f, GareSide::Filter, ce.ph.R));
  }

  TEST_CASE("classical counterexample") {
    const Counterexample ce = counterexample("classical");
    const GareSolutionPair o = solve_original_gares(ce.sys);
    const Matrix E = ce.sys.E;
    CHECK(rel_diff(E.transpose() * o.P_c, E.transpose() * ce.P_c) < 1e-8);
    CHECK(rel_diff(E * o.P_f.transpose(), E * ce.P_f.transpose()) < 1e-8);
    const GareResiduals r = gare_residuals(ce.sys, Matrix(), ce.P_c, ce.P_f, GareVariant::Original);
    CHECK(r.residual_c <= 1e-12 * r.scale_c);
    CHECK(r.residual_f <= 1e-12 * r.scale_f);
  }

  TEST_CASE("symmetric systems give transposed solutions") {
    const Matrix G = phlqg::test::random_matrix(3, 3);
    const Matrix A = -(G * G.transpose()) - Matrix::Identity(3, 3);
    const Matrix B = phlqg::test::random_matrix(3, 2);
    const DescriptorSystem sys{Matrix::Identity(3, 3), A, B, B.transpose()};
    const GareSolutionPair o = solve_original_gares(sys);
    CHECK(rel_diff(o.P_c, o.P_f.transpose()) < 1e-9);
  }

  TEST_CASE("residual perturbation and variant mismatch") {
    const Counterexample ce = counterexample("phdae_mor");
    Matrix Pc = ce.P_c;
    Pc(0, 0) += 1e-3;
    const GareResiduals r = gare_residuals(ce.sys, ce.ph.R, Pc, ce.P_f, GareVariant::Modified);
    CHECK(r.residual_c > 1e-6);
    CHECK(std::isfinite(r.residual_c));

    const GareResiduals o = gare_residuals(ce.sys, ce.ph.R, ce.P_c, ce.P_f, GareVariant::Original);
    CHECK(o.residual_f == doctest::Approx((2.0 * ce.ph.R).norm()).epsilon(1e-10));
  }

  TEST_CASE("is_stabilizing rejects the other roots") {
    const DescriptorSystem s = scalar_sys();
    const Matrix P = Matrix::Constant(1, 1, kS2 - 1);
    CHECK(is_stabilizing(s, P, GareSide::Control));
    CHECK_FALSE(is_stabilizing(s, -P, GareSide::Control));
    CHECK_FALSE(is_stabilizing(s, Matrix::Constant(1, 1, -(kS2 + 1)), GareSide::Control));
  }

  TEST_CASE("control solution follows the transformation rule") {
    const MsdModels msd = msd_chain({.masses = 4});
    const DescriptorSystem sys = msd.semi_explicit.descriptor();
    const Matrix Pc = solve_control_gare(sys);
    Matrix S = random_invertible(sys.n()), T = random_invertible(sys.n());
    // S and T must keep E = diag(I, 0) so the transformed system stays semi-explicit in blocks
    const Eigen::Index r = sys.n() - 1;
    S.topRightCorner(r, 1).setZero();
    S.bottomLeftCorner(1, r).setZero();
    T = Matrix::Identity(sys.n(), sys.n());
    T.topLeftCorner(r, r) = S.topLeftCorner(r, r);
    const DescriptorSystem ts = transform(sys, S, T);
    const Matrix Pt = solve_control_gare(ts);
    // P~ = S^-T P T^-1, compared through E~^T P~ = T^-T E^T P T^-1
    const Matrix Ti = T.inverse();
    CHECK(rel_diff(ts.E.transpose() * Pt, Ti.transpose() * sys.E.transpose() * Pc * Ti) < 1e-7);
  }

  TEST_CASE("filter solution: deflating route equals Q^-T") {
    for (const PortHamiltonianDAE& ph : {msd_chain({.masses = 6}).semi_explicit,
                                         transport_network({.nodes = 2, .pipes = {{0, 1}}, .boundary = {0}, .inner_nodes = 3}).semi_explicit}) {
      const Matrix Pf = solve_filter_gare(ph);
      const Matrix Pd = solve_filter_gare_deflating(ph);
      CHECK(rel_diff(ph.E * Pd.transpose(), ph.E * Pf.transpose()) < 1e-7);
      const GareSolutionPair g = solve_modified_gares(ph);
      const GareResiduals r = gare_residuals(ph.descriptor(), ph.R, g.P_c, g.P_f, GareVariant::Modified);
      CHECK(r.residual_c <= 1e-8 * r.scale_c);
      CHECK(r.residual_f <= 1e-8 * r.scale_f);
      CHECK(g.stabilizing_c);
      CHECK(g.stabilizing_f);
    }
  }

  TEST_CASE("even pencil layout") {
    const Matrix one = Matrix::Ones(1, 1);
    const EvenPencil p = control_even_pencil(one, -one, one, one);
    CHECK(rel_diff(p.script_E, mat({{0, -1}, {1, 0}})) == 0.0);
    CHECK(rel_diff(p.script_A, mat({{-1, 1}, {1, 1}})) == 0.0);
  }

  TEST_CASE("stable impulse-free check") {
    CHECK(is_stable_impulse_free(mat({{1, 0}, {0, 0}}), mat({{-1, 0}, {0, 1}})));
    CHECK_FALSE(is_stable_impulse_free(mat({{1, 0}, {0, 0}}), mat({{1, 0}, {0, 1}})));
    CHECK_FALSE(is_stable_impulse_free(mat({{0, 1}, {0, 0}}), Matrix::Identity(2, 2)));
  }
}

#include "phlqg/kyp.hpp"

#include <algorithm>
#include <cmath>

#include <lapacke.h>

namespace phlqg {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

// Finite eigenvalues with |lambda| below this multiple of the pencil scale
// are treated as finite; LAPACK reports infinite ones with beta ~ roundoff.
thread_local double g_finite_bound = 0;
thread_local bool g_select_anti = true;

lapack_logical select_eig(const double* ar, const double* ai, const double* beta) {
  const double a = std::hypot(*ar, *ai);
  if (!(std::abs(*beta) * g_finite_bound > a)) return 0;
  const double re = *ar / *beta;
  return g_select_anti ? re > 0 : re < 0;
}

// Even pencil of the KYP LMI with S replaced by S + eps I:
//   [[A, 0, B], [-quad, -A^T, Ch], [Ch^T, -B^T, S]] - s diag(I, I, 0),
// whose deflating subspace [I; X; K] carries the extremal solution. The dual
// form [[A^T, quad, Ch], [0, -A, B], [-B^T, Ch^T, -S]] carries [I; X^-1; L].
// S is never inverted, so the 1/eps scale does not enter the data.
Matrix pencil_solution(const ReducedKypProblem& p, double eps, bool dual, double* cond_out) {
  const Eigen::Index r = p.r(), m = p.m(), N = 2 * r + m;
  const Matrix Ch = p.C1.transpose() + p.cross_extra;  // r x m
  const Matrix S = p.S_block + eps * Matrix::Identity(m, m);
  Matrix A = Matrix::Zero(N, N), E = Matrix::Zero(N, N);
  if (!dual) {
    A.block(0, 0, r, r) = p.A11;
    A.block(0, 2 * r, r, m) = p.B1;
    A.block(r, 0, r, r) = -p.quad_extra;
    A.block(r, r, r, r) = -p.A11.transpose();
    A.block(r, 2 * r, r, m) = Ch;
    A.block(2 * r, 0, m, r) = Ch.transpose();
    A.block(2 * r, r, m, r) = -p.B1.transpose();
    A.block(2 * r, 2 * r, m, m) = S;
  } else {
    A.block(0, 0, r, r) = p.A11.transpose();
    A.block(0, r, r, r) = p.quad_extra;
    A.block(0, 2 * r, r, m) = Ch;
    A.block(r, r, r, r) = -p.A11;
    A.block(r, 2 * r, r, m) = p.B1;
    A.block(2 * r, 0, m, r) = -p.B1.transpose();
    A.block(2 * r, r, m, r) = Ch.transpose();
    A.block(2 * r, 2 * r, m, m) = -S;
  }
  E.topLeftCorner(2 * r, 2 * r).setIdentity();

  // Count before reordering, so imaginary-axis roots are reported as such.
  const double scale = std::max(A.norm(), 1.0);
  g_finite_bound = 1e10 * scale;
  {
    Eigen::GeneralizedEigenSolver<Matrix> ges(A, E, false);
    const auto& al = ges.alphas();
    const auto& be = ges.betas();
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!(std::abs(be(i)) * g_finite_bound > std::abs(al(i)))) continue;
      const Complex l = al(i) / be(i);
      if (std::abs(l.real()) <= 1e-9 * (1.0 + std::abs(l)))
        fail(ErrorCode::NoMaximalSolution, "KYP pencil has imaginary-axis eigenvalues");
    }
  }
  g_select_anti = !dual;
  std::vector<double> ar(N), ai(N), be(N);
  Matrix VL(1, 1), VR(N, N);
  lapack_int sdim = 0;
  const lapack_int n = static_cast<lapack_int>(N);
  const lapack_int info = LAPACKE_dgges(LAPACK_COL_MAJOR, 'N', 'V', 'S', select_eig, n, A.data(), n,
                                        E.data(), n, &sdim, ar.data(), ai.data(), be.data(), VL.data(),
                                        1, VR.data(), n);
  if (info != 0) fail(ErrorCode::NoMaximalSolution, "QZ of the KYP pencil failed, info " + std::to_string(info));
  if (sdim != r) fail(ErrorCode::NoMaximalSolution, "deflating subspace has the wrong dimension");
  const Matrix U1 = VR.block(0, 0, r, r);
  const Matrix U2 = VR.block(r, 0, r, r);
  const double c = condition_number(U1);
  if (cond_out) *cond_out = c;
  if (!(c < 1e12)) fail(ErrorCode::IllConditioned, "subspace basis condition " + std::to_string(c));
  return sym(U1.transpose().fullPivLu().solve(U2.transpose()).transpose());
}

}  // namespace

Matrix controllable_subspace(const Matrix& A, const Matrix& B, double tol) {
  const Eigen::Index n = A.rows();
  const double scale = std::max({norm2(A), norm2(B), kTiny});
  Matrix V(n, 0);
  Matrix W = Matrix::Identity(n, n);
  Matrix input = B;
  while (W.cols() > 0 && input.cols() > 0) {
    const Matrix Bk = W.transpose() * input;
    Eigen::BDCSVD<Matrix> svd(Bk, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    Eigen::Index rho = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * scale) ++rho;
    if (rho == 0) break;
    const Matrix Vnew = W * svd.matrixU().leftCols(rho);
    Matrix Vn(n, V.cols() + rho);
    Vn << V, Vnew;
    V = std::move(Vn);
    W = (W * svd.matrixU().rightCols(W.cols() - rho)).eval();
    input = A * Vnew;
  }
  return V;
}

ReducedKypProblem build_reduced_kyp(const Matrix& A11, const Matrix& B1, const Matrix& B2,
                                    const Matrix& C1, const Matrix& C2, const Matrix& Q11,
                                    KypVariant variant) {
  const Eigen::Index r = A11.rows(), m = B1.cols();
  if (A11.cols() != r || B1.rows() != r || C1.rows() != m || C1.cols() != r || Q11.rows() != r ||
      B2.cols() != m || C2.rows() != m || C2.cols() != B2.rows())
    fail(ErrorCode::InvalidArgument, "reduced KYP block dimensions");
  ReducedKypProblem p;
  p.A11 = A11;
  p.B1 = B1;
  p.C1 = C1;
  p.Q11 = Q11;
  p.variant = variant;
  const Matrix CB = C2 * B2;  // m x m
  p.S_block = -CB - CB.transpose();
  p.cross_extra = Matrix::Zero(r, m);
  p.quad_extra = Matrix::Zero(r, r);
  if (variant == KypVariant::General) {
    p.S_block -= 2.0 * CB.transpose() * CB;
    p.cross_extra = 2.0 * C1.transpose() * CB;
    p.quad_extra = 2.0 * C1.transpose() * C1;
  }
  p.S_block = sym(p.S_block);
  const double lm = lmi_residual(p, Q11);
  if (lm < -1e-7 * lmi_scale(p, Q11))
    fail(ErrorCode::CertificateFailure, "Q11 violates the reduced KYP LMI, lambda_min = " + std::to_string(lm));
  return p;
}

Matrix kyp_matrix(const ReducedKypProblem& p, const Matrix& X, double eps) {
  const Eigen::Index r = p.r(), m = p.m();
  Matrix W(r + m, r + m);
  const Matrix W12 = p.C1.transpose() - X * p.B1 + p.cross_extra;
  W.topLeftCorner(r, r) = -p.A11.transpose() * X - X * p.A11 - p.quad_extra;
  W.topRightCorner(r, m) = W12;
  W.bottomLeftCorner(m, r) = W12.transpose();
  W.bottomRightCorner(m, m) = p.S_block + eps * Matrix::Identity(m, m);
  return W;
}

double lmi_residual(const ReducedKypProblem& p, const Matrix& X, double eps) {
  return lambda_min_sym(kyp_matrix(p, X, eps));
}

double lmi_scale(const ReducedKypProblem& p, const Matrix& X) {
  return std::max(2.0 * (p.A11.transpose() * X).norm() + p.quad_extra.norm() + p.C1.norm() +
                      (X * p.B1).norm() + p.cross_extra.norm() + p.S_block.norm(),
                  kTiny);
}

namespace {

// Problem restricted to an orthonormal basis V of the controllable subspace.
ReducedKypProblem restrict_to(const ReducedKypProblem& p, const Matrix& V) {
  ReducedKypProblem c = p;
  c.A11 = V.transpose() * p.A11 * V;
  c.B1 = V.transpose() * p.B1;
  c.C1 = p.C1 * V;
  c.cross_extra = V.transpose() * p.cross_extra;
  c.quad_extra = V.transpose() * p.quad_extra * V;
  c.Q11 = V.transpose() * p.Q11 * V;
  return c;
}

// Uncontrollable stable modes leave W(X) bounded only from below, so the
// full pencil has no graph subspace. The solution is then taken on the
// controllable part and extended by zero, provided the result is feasible.
template <class Solve>
Matrix with_controllable_fallback(const ReducedKypProblem& p, double eps, int* cdim, Solve&& solve) {
  const Matrix V = controllable_subspace(p.A11, p.B1);
  if (cdim) *cdim = static_cast<int>(V.cols());
  try {
    return solve(p);
  } catch (const Error&) {
    if (V.cols() == p.r()) throw;
  }
  const Matrix Xc = V.cols() > 0 ? solve(restrict_to(p, V)) : Matrix(0, 0);
  const Matrix X = V.cols() > 0 ? Matrix(sym(V * Xc * V.transpose())) : Matrix::Zero(p.r(), p.r());
  if (lmi_residual(p, X, eps) < -1e-8 * lmi_scale(p, X))
    fail(ErrorCode::NoMaximalSolution, "uncontrollable part of the KYP problem does not decouple");
  return X;
}

}  // namespace

Matrix solve_max(const ReducedKypProblem& p, double eps, KypDiagnostics* diag) {
  if (!(eps > 0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (p.r() == 0) return Matrix(0, 0);
  double cond = 0;
  int cdim = 0;
  const Matrix X = with_controllable_fallback(
      p, eps, &cdim, [&](const ReducedKypProblem& q) { return pencil_solution(q, eps, false, &cond); });
  if (diag) {
    diag->cond_basis = cond;
    diag->controllable_dim = cdim;
    diag->lmi_min = lmi_residual(p, X, eps);
  }
  return X;
}

Matrix solve_max_dual(const ReducedKypProblem& p, double eps) {
  if (!(eps > 0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (p.r() == 0) return Matrix(0, 0);
  // Minimal solution Y of the dual inequality, then X = Y^-1.
  return with_controllable_fallback(p, eps, nullptr, [&](const ReducedKypProblem& q) {
    const Matrix Y = pencil_solution(q, eps, true, nullptr);
    const double c = condition_number(Y);
    if (!(c < 1e14)) fail(ErrorCode::IllConditioned, "dual solution is singular");
    return Matrix(sym(Y.inverse()));
  });
}

}  // namespace phlqg

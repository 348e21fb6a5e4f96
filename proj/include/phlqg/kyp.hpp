#ifndef PHLQG_KYP_HPP
#define PHLQG_KYP_HPP

#include "phlqg/linalg.hpp"

namespace phlqg {

enum class KypVariant { Index1, General };

/// Reduced KYP LMI on the differential part of a decoupled realization:
///   W(X) = [[-A11^T X - X A11 - quad_extra, C1^T - X B1 + cross_extra],
///           [(.)^T,                          S_block                 ]] >= 0.
struct ReducedKypProblem {
  Matrix A11, B1, C1;
  Matrix S_block;      // m x m
  Matrix cross_extra;  // r x m
  Matrix quad_extra;   // r x r
  Matrix Q11;          // known feasible point
  KypVariant variant = KypVariant::Index1;

  Eigen::Index r() const { return A11.rows(); }
  Eigen::Index m() const { return B1.cols(); }
};

struct KypDiagnostics {
  double cond_basis = 0;     // leading block of the invariant subspace basis
  int controllable_dim = 0;  // dimension of the controllable subspace of (A11, B1)
  double lmi_min = 0;        // lambda_min of W(X) with the regularized S block
};

/// Assembles the reduced LMI from the blocks of a decoupled realization and
/// checks that Q11 is feasible (CertificateFailure otherwise).
ReducedKypProblem build_reduced_kyp(const Matrix& A11, const Matrix& B1, const Matrix& B2,
                                    const Matrix& C1, const Matrix& C2, const Matrix& Q11,
                                    KypVariant variant);

/// W(X); eps is added to the S block.
Matrix kyp_matrix(const ReducedKypProblem& p, const Matrix& X, double eps = 0.0);

/// lambda_min of W(X).
double lmi_residual(const ReducedKypProblem& p, const Matrix& X, double eps = 0.0);

/// Norm scale of W(X) used for relative certificates.
double lmi_scale(const ReducedKypProblem& p, const Matrix& X);

/// Maximal solution of the LMI with S replaced by S + eps I, from the
/// anti-stable deflating subspace of the even KYP pencil (ordered QZ).
/// Fails with NoMaximalSolution or IllConditioned when the subspace is not
/// a graph, which happens for (nearly) uncontrollable stable modes. Exactly
/// uncontrollable modes are retried on the controllable subspace, with X
/// extended by zero when that extension is still feasible.
Matrix solve_max(const ReducedKypProblem& p, double eps = 1e-12, KypDiagnostics* diag = nullptr);

/// Same regularized problem through the dual inequality: minimal solution Y
/// from the stable deflating subspace of the dual pencil, then X = Y^-1.
Matrix solve_max_dual(const ReducedKypProblem& p, double eps = 1e-12);

/// Orthonormal basis of the controllable subspace of (A, B) by a staircase of
/// SVD rank decisions with relative tolerance tol.
Matrix controllable_subspace(const Matrix& A, const Matrix& B, double tol = 1e-10);

}  // namespace phlqg

#endif  // PHLQG_KYP_HPP

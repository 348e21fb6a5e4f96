#ifndef PHLQG_LINALG_HPP
#define PHLQG_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "phlqg/error.hpp"

namespace phlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

struct PencilInfo {
  bool regular = false;
  bool impulse_free = false;
  int index = 0;
  int rank_E = 0;
  std::vector<Complex> finite_eigenvalues;
};

struct InvariantSubspace {
  Matrix basis;
  int count = 0;
};

struct SchurForm {
  Matrix T;  // standardized quasi-triangular factor
  Matrix U;  // orthogonal, M = U T U^T
};

// Default tolerances shared across modules.
inline constexpr double kRankTol = 1e-10;
inline constexpr double kSymTol = 1e-8;

Matrix pinv(const Matrix& M, double tol = kRankTol);

/// Returns L with full column rank and L L^T = M. Eigenvalues in
/// [-tol*|M|, tol*|M|] are clipped to zero.
Matrix psd_factor(const Matrix& M, double tol = kSymTol);

/// Real Schur form with 2x2 blocks in LAPACK standard form. The QR iteration
/// is capped at 100*n steps.
SchurForm real_schur(const Matrix& M);

InvariantSubspace ordered_invariant_subspace(const Matrix& M,
                                             const std::function<bool(Complex)>& selector);

PencilInfo pencil_spectrum(const Matrix& E, const Matrix& A, double tol = kRankTol);

// Small helpers used throughout the solvers.
double norm2(const Matrix& M);
int numerical_rank(const Matrix& M, double tol = kRankTol);
/// Orthonormal basis of ker(M), rank decided relative to sigma_max.
Matrix null_space(const Matrix& M, double tol = kRankTol);
/// Orthonormal basis of im(M).
Matrix range_space(const Matrix& M, double tol = kRankTol);
Matrix sym(const Matrix& M);
double lambda_min_sym(const Matrix& M);
double lambda_max_sym(const Matrix& M);
std::vector<Complex> eigenvalues(const Matrix& M);
double min_singular_value(const Matrix& M);
double condition_number(const Matrix& M);

/// Solves A X + X B = C.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);
/// Solves A^T X + X A + Q = 0 for symmetric Q.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Frequency response C (s E - A)^{-1} B + D.
CMatrix transfer(const Matrix& E, const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, Complex s);

Matrix block_diag(const Matrix& X, const Matrix& Y);

}  // namespace phlqg

#endif  // PHLQG_LINALG_HPP

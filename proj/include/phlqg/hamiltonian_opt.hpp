#ifndef PHLQG_HAMILTONIAN_OPT_HPP
#define PHLQG_HAMILTONIAN_OPT_HPP

#include "phlqg/kyp.hpp"
#include "phlqg/model.hpp"

namespace phlqg {

/// Realization with decoupled differential and algebraic parts:
/// S E T^-1 = diag(I_r, 0), S A T^-1 = diag(A11, I), where A is the
/// realization after the optional feedback u = -y.
struct DecoupledWcf {
  Matrix A11, B1, B2, C1, C2;
  Matrix Q11, Q21, Q22;
  Matrix J, R;  // transformed structure matrices (R includes BB^T when fed back)
  Matrix S, T;
  int r = 0;
  bool fed_back = false;
};

struct OptimizedHamiltonian {
  PortHamiltonianDAE ph;  // E, A, B, C untouched; J, R, Q replaced
  Matrix Q_bar, J_bar, R_bar;
  Matrix X_max, X21, X22;
  Matrix J_hat, R_hat, X_hat;
  Vector sigma_hat;
  // Certificate margins, all relative to the natural scale of each check.
  double factor_residual = 0;  // (J^-R^[-BB^T])X^ vs diag(A11, I)
  double output_residual = 0;  // B~^T X^ vs C~
  double skew_residual = 0;
  double r_hat_min = 0;        // lambda_min(R^) / scale
  double etq_gain_min = 0;     // lambda_min(E^T Q_bar - E^T Q) / scale
  bool controllable = true;    // strong controllability of (E, A, B)
};

struct HamiltonianOptions {
  double eps = 1e-12;
  bool extrapolate = true;  // Richardson step 2 X(eps) - X(4 eps)
  double cert_tol = 1e-9;
};

DecoupledWcf to_decoupled_wcf(const PortHamiltonianDAE& ph, bool apply_feedback);

ReducedKypProblem build_reduced_kyp(const DecoupledWcf& w, KypVariant variant);

/// Maximal solution used for the Hamiltonian replacement: solve_max, the
/// optional extrapolation in eps, and a symmetric correction enforcing
/// U2^T (C1 - B1^T X) = 0 on ker(B2), the part of the limit LMI the
/// factorization needs exactly.
Matrix refined_max(const ReducedKypProblem& p, const Matrix& B2, const HamiltonianOptions& opt = {});

OptimizedHamiltonian optimize_index1(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt = {});
OptimizedHamiltonian optimize_general(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt = {});

/// Index-1 route when (E, A) is impulse-free, general route otherwise.
OptimizedHamiltonian optimize_hamiltonian(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt = {});

/// Square roots of eig(X_max^-T P_c11), with P_c expressed in the
/// decoupled coordinates of w.
Vector improved_char_values(const DecoupledWcf& w, const Matrix& X_max, const Matrix& P_c);

}  // namespace phlqg

#endif  // PHLQG_HAMILTONIAN_OPT_HPP

#ifndef PHLQG_BALANCING_HPP
#define PHLQG_BALANCING_HPP

#include "phlqg/model.hpp"

namespace phlqg {

struct BalancedTruncationResult {
  Vector sigma;                // all characteristic values, descending
  Matrix S_l, T_l, W_l;        // n x (ell + n - r)
  PortHamiltonianDAE rom;      // structured route only
  DescriptorSystem rom_sys;    // always filled
  Matrix P_c_trunc;            // W_l^T P_c T_l
  int ell = 0;
  bool structured = true;
  bool rom_regular = false;
};

struct BalanceOptions {
  double gap_tol = 1e-8;
  double rank_tol = kRankTol;
  // Emit the step-5 formulas as printed (J_r = S^T E S, B_r = S^T R) for
  // comparison; the result is generally not port-Hamiltonian.
  bool literal_step5 = false;
};

struct RomStructureReport {
  double skew = 0;        // ||J_r + J_r^T|| / ||J_r||
  double r_min = 0;       // lambda_min(R_r)
  double etq_sym = 0;     // ||E_r^T Q_r - Q_r^T E_r|| / ||E_r^T Q_r||
  double etq_min = 0;     // lambda_min(sym(E_r^T Q_r))
  double output = 0;      // ||C_r - B_r^T Q_r|| / (||B_r|| ||Q_r||)
  double a_residual = 0;  // ||A_r - (J_r - R_r) Q_r|| / scale
  bool pass = false;
};

/// Characteristic values of a system with stabilizing P_c, P_f. Non
/// semi-explicit input is brought to semi-explicit form first.
Vector characteristic_values(const DescriptorSystem& sys, const Matrix& P_c, const Matrix& P_f);

/// Structure-preserving LQG balanced truncation with P_f = Q^-T.
BalancedTruncationResult balance_truncate(const PortHamiltonianDAE& ph, int ell,
                                          const BalanceOptions& opt = {});
/// Same with precomputed stabilizing solutions.
BalancedTruncationResult balance_truncate(const PortHamiltonianDAE& ph, int ell, const Matrix& P_c,
                                          const Matrix& P_f, const BalanceOptions& opt = {});

/// Same projection with both solutions from the original GAREs; the ROM is
/// an unstructured descriptor system.
BalancedTruncationResult classical_lqg_bt(const DescriptorSystem& sys, int ell,
                                          const BalanceOptions& opt = {});
BalancedTruncationResult classical_lqg_bt(const DescriptorSystem& sys, int ell, const Matrix& P_c,
                                          const Matrix& P_f, const BalanceOptions& opt = {});

RomStructureReport check_rom_structure(const PortHamiltonianDAE& rom, double tol = 1e-10);
RomStructureReport check_rom_structure(const BalancedTruncationResult& res, double tol = 1e-10);

}  // namespace phlqg

#endif  // PHLQG_BALANCING_HPP

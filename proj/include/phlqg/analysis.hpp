#ifndef PHLQG_ANALYSIS_HPP
#define PHLQG_ANALYSIS_HPP

#include <string>
#include <vector>

#include "phlqg/model.hpp"

namespace phlqg {

/// Right coprime factors [M; N] as one descriptor realization with
/// feedthrough D = [I; 0].
struct CoprimeRealization {
  Matrix E, A, B, C, D;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

struct OdeRealization {
  Matrix A, B, C, D;
};

struct CoprimeLyapReport {
  double lyap_max = 0;      // lambda_max(A_Pc L^T + L A_Pc^T + B B^T)
  double lyap_scale = 0;
  double sym_residual = 0;  // ||E L^T - L E^T|| / scale
  double gare_residual = 0; // control equation in coprime form, relative
  bool pass = false;
};

struct ControllerReport {
  DescriptorSystem controller;
  Matrix E_cl, A_cl;
  bool regular = false, impulse_free = false, stable = false;
  double kyp_min = 0;  // lambda_min of the controller KYP block / scale
  double etp_min = 0;  // lambda_min(sym(E^T P_c)) / scale
  bool passive = false;
  bool pass() const { return regular && impulse_free && stable && passive; }
};

struct ErrorRecord {
  int ell = 0;
  double bound = 0;
  double coprime_error = 0;
  bool rom_regular = false;
  std::string failure;  // error code name when the truncation failed
};

struct ErrorReport {
  std::string variant;
  Vector sigma;
  std::vector<ErrorRecord> records;
};

CoprimeRealization coprime_realization(const DescriptorSystem& sys, const Matrix& P_c);

/// Schur-complement ODE realization of an impulse-free descriptor system with
/// feedthrough D (zero when empty). Non semi-explicit E is transformed first.
OdeRealization dae_to_ode(const DescriptorSystem& sys, const Matrix& D = Matrix());
OdeRealization dae_to_ode(const CoprimeRealization& cr);

CMatrix frequency_response(const OdeRealization& sys, double omega);

/// H-infinity norm of a stable ODE realization by level-set bisection on
/// the imaginary-axis eigenvalues of the associated Hamiltonian matrix.
/// The result is a lower bound within relative accuracy tol.
double hinf_norm(const OdeRealization& sys, double tol = 1e-6);

double error_bound(const Vector& sigma, int ell);

/// ||[M; N] - [M_r; N_r]||_inf. An empty ROM (n = 0) stands for M_r = I, N_r = 0.
double coprime_error(const DescriptorSystem& fom, const DescriptorSystem& rom, const Matrix& P_c,
                     const Matrix& P_c_rom, double tol = 1e-6);

/// max over omegas of ||M(iw)^* M(iw) + N(iw)^* N(iw) - I||.
double normalization_error(const CoprimeRealization& cr, const std::vector<double>& omegas);

std::vector<double> log_frequencies(double lo, double hi, int count);

CoprimeLyapReport verify_coprime_lyap(const DescriptorSystem& sys, const Matrix& P_c, const Matrix& P_f,
                                      double tol = 1e-8);

ControllerReport lqg_controller(const PortHamiltonianDAE& ph, const Matrix& P_c, double tol = 1e-8);

}  // namespace phlqg

#endif  // PHLQG_ANALYSIS_HPP

#ifndef PHLQG_RICCATI_HPP
#define PHLQG_RICCATI_HPP

#include "phlqg/model.hpp"

namespace phlqg {

enum class GareVariant { Modified, Original };
enum class GareSide { Control, Filter };

struct GareSolutionPair {
  Matrix P_c, P_f;
  double residual_c = 0, residual_f = 0;
  bool stabilizing_c = false, stabilizing_f = false;
  GareVariant variant = GareVariant::Modified;
};

struct EvenPencil {
  Matrix script_E, script_A;
};

struct GareResiduals {
  double residual_c = 0, residual_f = 0, sym_c = 0, sym_f = 0;
  // Sums of the norms of the individual terms, used as relative scales.
  double scale_c = 0, scale_f = 0;
};

struct GareOptions {
  int shift_index = -1;            // -1: best-conditioned candidate shift
  double margin = 1e-9;            // imaginary-axis exclusion band
  double residual_tol = 1e-8;      // relative certificate
  bool certify = true;
};

/// Diagnostics of the last deflating-subspace solve.
struct GareDiagnostics {
  double shift = 0;
  double subspace_residual = 0;  // ||A V - E V J_small|| / scale
  double cond_V21 = 0;
  bool preconditioned = false;   // polar preconditioning of the trailing block used
};

/// Stabilizing solution of A^T X + X A - X G X + H = 0.
Matrix solve_care(const Matrix& A, const Matrix& G, const Matrix& H, double margin = 1e-9);

/// Even pencil ([[0,-E],[E^T,0]], [[-G,-A],[-A^T,H]]) of the control-type GARE.
EvenPencil control_even_pencil(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H);

/// Stabilizing solution of A^T P + P^T A - P^T G P + H = 0, E^T P = P^T E for a
/// semi-explicit E, via the stable deflating subspace of the even pencil.
Matrix solve_gare(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H,
                  const GareOptions& opt = {}, GareDiagnostics* diag = nullptr);

/// P_f = Q^-T, certified against the modified filter GARE.
Matrix solve_filter_gare(const PortHamiltonianDAE& ph);

/// Modified filter GARE through the deflating-subspace route (oracle for Q^-T).
Matrix solve_filter_gare_deflating(const PortHamiltonianDAE& ph, const GareOptions& opt = {});

/// Control GARE; non-semi-explicit inputs are transformed first and mapped back.
Matrix solve_control_gare(const DescriptorSystem& sys, const GareOptions& opt = {},
                          GareDiagnostics* diag = nullptr);

GareSolutionPair solve_original_gares(const DescriptorSystem& sys, const GareOptions& opt = {});
GareSolutionPair solve_modified_gares(const PortHamiltonianDAE& ph, const GareOptions& opt = {});

GareResiduals gare_residuals(const DescriptorSystem& sys, const Matrix& R, const Matrix& P_c,
                             const Matrix& P_f, GareVariant variant);

/// PSD test of E^T P (control) or E P^T (filter), cross-checked against the
/// closed-loop spectrum. R enters the filter residual only (empty: original).
bool is_stabilizing(const DescriptorSystem& sys, const Matrix& P, GareSide side,
                    const Matrix& R = Matrix());

/// Regular, impulse-free, finite spectrum in the open left half-plane.
bool is_stable_impulse_free(const Matrix& E, const Matrix& A, double margin = 0.0);

}  // namespace phlqg

#endif  // PHLQG_RICCATI_HPP

#ifndef PHLQG_MODEL_HPP
#define PHLQG_MODEL_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include "phlqg/linalg.hpp"

namespace phlqg {

/// Dense descriptor system E x' = A x + B u, y = C x. The pencil is computed
/// on request and not cached, so instances stay plain values.
struct DescriptorSystem {
  Matrix E, A, B, C;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }
  PencilInfo pencil(double tol = kRankTol) const { return pencil_spectrum(E, A, tol); }
  DescriptorSystem dual() const { return {E.transpose(), A.transpose(), C.transpose(), B.transpose()}; }
};

void check_dimensions(const DescriptorSystem& sys);

/// Port-Hamiltonian descriptor system. A and C are stored; assemble() sets
/// them to (J-R)Q and B^T Q. After a Hamiltonian replacement they keep the
/// original realization and (J-R)Q matches only up to round-off.
struct PortHamiltonianDAE {
  Matrix E, J, R, Q, B;
  Matrix A, C;
  int rank_E = 0;

  Eigen::Index n() const { return E.rows(); }
  Eigen::Index m() const { return B.cols(); }
  double hamiltonian(const Vector& x) const { return 0.5 * x.dot(E.transpose() * Q * x); }
  DescriptorSystem descriptor() const { return {E, A, B, C}; }
};

struct StructuralReport {
  bool impulse_controllable = false;
  bool strongly_stabilizable = false;
  bool strongly_anti_stabilizable = false;
  bool strongly_controllable = false;
  bool impulse_observable = false;
  bool strongly_detectable = false;
};

PortHamiltonianDAE assemble(const Matrix& E, const Matrix& J, const Matrix& R, const Matrix& Q,
                            const Matrix& B, double tol = kSymTol);

/// Re-runs the structural checks on stored data; throws StructureViolation.
void validate(const PortHamiltonianDAE& ph, double tol = kSymTol);

/// (SET^-1, SJS^T, SRS^T, S^-T Q T^-1, SB).
PortHamiltonianDAE transform(const PortHamiltonianDAE& ph, const Matrix& S, const Matrix& T);
DescriptorSystem transform(const DescriptorSystem& sys, const Matrix& S, const Matrix& T);

template <class System>
struct SemiExplicit {
  System sys;
  Matrix S, T;
  int r = 0;
};

/// SVD-based transformation to E = diag(I_r, 0). When E already has that
/// form, S = T = I.
SemiExplicit<PortHamiltonianDAE> to_semi_explicit(const PortHamiltonianDAE& ph);
SemiExplicit<DescriptorSystem> to_semi_explicit(const DescriptorSystem& sys);
/// The transformation pair only.
std::pair<Matrix, Matrix> semi_explicit_transform(const Matrix& E, int* rank = nullptr);

/// True when E equals diag(I_r, 0) entrywise.
bool is_semi_explicit(const Matrix& E, int* rank = nullptr);

PortHamiltonianDAE embed_feedthrough(const Matrix& J_h, const Matrix& R_h, const Matrix& Q_h,
                                     const Matrix& B_h, const Matrix& P_h, const Matrix& S_h,
                                     const Matrix& N_h, double tol = kSymTol);

/// sign = -1 applies u = -y (R += BB^T); sign = +1 undoes it.
PortHamiltonianDAE output_feedback(const PortHamiltonianDAE& ph, int sign, double tol = kSymTol);

StructuralReport structural_report(const DescriptorSystem& sys, double tol = 1e-8);

/// KYP block [[-A^T X - X^T A, C^T - X^T B], [C - B^T X, 0]].
Matrix kyp_block(const DescriptorSystem& sys, const Matrix& X);

// System file format.
using AnySystem = std::variant<DescriptorSystem, PortHamiltonianDAE>;
void write_system(std::ostream& os, const DescriptorSystem& sys);
void write_system(std::ostream& os, const PortHamiltonianDAE& ph);
AnySystem read_system(std::istream& is);
void save_system(const std::string& path, const AnySystem& sys);
AnySystem load_system(const std::string& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace phlqg

#endif  // PHLQG_MODEL_HPP

#include "phlqg/hamiltonian_opt.hpp"

#include <algorithm>
#include <cmath>

#include "phlqg/riccati.hpp"

namespace phlqg {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

Matrix skew(const Matrix& M) { return 0.5 * (M - M.transpose()); }

double rel(double num, double den) { return num / std::max(den, kTiny); }

}  // namespace

DecoupledWcf to_decoupled_wcf(const PortHamiltonianDAE& ph, bool apply_feedback) {
  const PortHamiltonianDAE base = apply_feedback ? output_feedback(ph, -1) : ph;
  const auto se = to_semi_explicit(base);
  const PortHamiltonianDAE& s1 = se.sys;
  const Eigen::Index n = ph.n(), r = se.r, k = n - r;

  DecoupledWcf w;
  w.r = se.r;
  w.fed_back = apply_feedback;
  Matrix S2 = Matrix::Identity(n, n), S2inv = Matrix::Identity(n, n);
  Matrix T2 = Matrix::Identity(n, n), T2inv = Matrix::Identity(n, n);
  w.A11 = s1.A.topLeftCorner(r, r);
  if (k > 0) {
    const Matrix A12 = s1.A.topRightCorner(r, k), A21 = s1.A.bottomLeftCorner(k, r);
    const Matrix A22 = s1.A.bottomRightCorner(k, k);
    const double c = condition_number(A22);
    if (!(c < 1e12)) fail(ErrorCode::NotImpulseFree, "trailing block of the semi-explicit form is singular");
    if (c > 1e10) fail(ErrorCode::IllConditionedTrailingBlock, "trailing block condition " + std::to_string(c));
    const auto lu = A22.fullPivLu();
    const Matrix A22inv = lu.inverse();
    const Matrix X = A22inv * A21;
    const Matrix Y = A12 * A22inv;
    S2.topRightCorner(r, k) = -Y;
    S2.bottomRightCorner(k, k) = A22inv;
    S2inv.topRightCorner(r, k) = A12;
    S2inv.bottomRightCorner(k, k) = A22;
    T2.bottomLeftCorner(k, r) = X;
    T2inv.bottomLeftCorner(k, r) = -X;
    w.A11 = w.A11 - Y * A21;
  }
  w.S = S2 * se.S;
  w.T = T2 * se.T;
  const Matrix Bt = S2 * s1.B;
  const Matrix Ct = s1.C * T2inv;
  Matrix Qt = S2inv.transpose() * s1.Q * T2inv;
  w.J = skew(S2 * s1.J * S2.transpose());
  w.R = sym(S2 * s1.R * S2.transpose());
  w.B1 = Bt.topRows(r);
  w.B2 = Bt.bottomRows(k);
  w.C1 = Ct.leftCols(r);
  w.C2 = Ct.rightCols(k);

  const double qs = std::max(Qt.norm(), kTiny);
  if (Qt.topRightCorner(r, k).norm() > 1e-8 * qs)
    fail(ErrorCode::StructureViolation, "decoupled Q has a nonzero (1,2) block");
  w.Q11 = sym(Qt.topLeftCorner(r, r));
  w.Q21 = Qt.bottomLeftCorner(k, r);
  w.Q22 = Qt.bottomRightCorner(k, k);
  if (k > 0) {
    if (!(condition_number(w.Q22) < 1e12))
      fail(ErrorCode::IllConditionedTrailingBlock, "Q22 is singular");
    if (lambda_max_sym(w.Q22 + w.Q22.transpose()) > 1e-8 * qs)
      fail(ErrorCode::StructureViolation, "Q22 + Q22^T is not negative semidefinite");
  }
  return w;
}

ReducedKypProblem build_reduced_kyp(const DecoupledWcf& w, KypVariant variant) {
  return build_reduced_kyp(w.A11, w.B1, w.B2, w.C1, w.C2, w.Q11, variant);
}

Matrix refined_max(const ReducedKypProblem& p, const Matrix& B2, const HamiltonianOptions& opt) {
  Matrix X = solve_max(p, opt.eps);
  if (opt.extrapolate) X = sym(2.0 * X - solve_max(p, 4.0 * opt.eps));
  const Eigen::Index m = p.m();
  const Matrix U2 = B2.rows() == 0 ? Matrix(Matrix::Identity(m, m)) : null_space(B2, kRankTol);
  if (U2.cols() == 0) return X;
  const Matrix F = p.B1 * U2;                   // r x q
  const Matrix Rc = U2.transpose() * p.C1 - F.transpose() * X;  // q x r
  const Matrix P = pinv(F, kRankTol).transpose();               // r x q
  const Matrix D = P * Rc + Rc.transpose() * P.transpose() - P * sym(Rc * F) * P.transpose();
  return sym(X + D);
}

namespace {

OptimizedHamiltonian assemble_optimized(const PortHamiltonianDAE& ph, const DecoupledWcf& w,
                                        const Matrix& X, bool general) {
  const Eigen::Index n = ph.n(), r = w.r, k = n - r, m = ph.m();
  OptimizedHamiltonian out;
  out.X_max = X;

  // SVD of B2^T = U1 Sigma V1^T.
  Matrix V1(k, 0), V2 = Matrix::Identity(k, k);
  if (k > 0 && m > 0) {
    Eigen::BDCSVD<Matrix> svd(w.B2.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::Index rt = 0;
    if (s.size() > 0 && s(0) > 0)
      for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > kRankTol * s(0)) ++rt;
    V1 = svd.matrixV().leftCols(rt);
    V2 = svd.matrixV().rightCols(k - rt);
  }
  const Matrix P1 = V1 * V1.transpose(), P2 = V2 * V2.transpose();
  const Matrix B2p = pinv(w.B2.transpose(), kRankTol);  // k x m
  Matrix K = -Matrix::Identity(V2.cols(), V2.cols());
  if (general) K -= V2.transpose() * w.C2.transpose() * w.C2 * V2;

  Matrix X21 = P1 * w.Q21 + B2p * w.B1.transpose() * (w.Q11 - X);
  Matrix X22 = P1 * w.Q22 - P2 * w.Q22.transpose() * P1 + V2 * K * V2.transpose();
  if (general) {
    X21 -= 2.0 * P2 * w.C2.transpose() * w.C1;
    X22 -= 2.0 * P2 * w.C2.transpose() * w.C2 * P1;
  }
  if (k > 0 && !(condition_number(X22) < 1e12)) fail(ErrorCode::IllConditioned, "X22 is singular");
  const auto xlu = X.fullPivLu();
  if (!xlu.isInvertible()) fail(ErrorCode::IllConditioned, "maximal solution is singular");
  const Matrix Xi = sym(xlu.inverse());
  const Matrix X22i = k > 0 ? Matrix(X22.fullPivLu().inverse()) : Matrix(0, 0);

  Matrix Jh(n, n), Rh(n, n);
  const Matrix Jh12 = 0.5 * Xi * X21.transpose() * X22i.transpose();
  Jh.topLeftCorner(r, r) = 0.5 * (w.A11 * Xi - Xi * w.A11.transpose());
  Jh.topRightCorner(r, k) = Jh12;
  Jh.bottomLeftCorner(k, r) = -Jh12.transpose();
  Jh.bottomRightCorner(k, k) = 0.5 * (X22i - X22i.transpose());
  Rh.topLeftCorner(r, r) = -0.5 * (w.A11 * Xi + Xi * w.A11.transpose());
  Rh.topRightCorner(r, k) = Jh12;
  Rh.bottomRightCorner(k, k) = -0.5 * (X22i + X22i.transpose());
  if (general) {
    Rh.topLeftCorner(r, r) -= w.B1 * w.B1.transpose();
    Rh.topRightCorner(r, k) -= w.B1 * w.B2.transpose();
    Rh.bottomRightCorner(k, k) -= w.B2 * w.B2.transpose();
  }
  Rh.bottomLeftCorner(k, r) = Rh.topRightCorner(r, k).transpose();
  out.skew_residual = rel((Jh + Jh.transpose()).norm(), Jh.norm());
  Jh = skew(Jh);
  Rh = sym(Rh);

  Matrix Xh = Matrix::Zero(n, n);
  Xh.topLeftCorner(r, r) = X;
  Xh.bottomLeftCorner(k, r) = X21;
  Xh.bottomRightCorner(k, k) = X22;

  Matrix Bt(n, m);
  Bt << w.B1, w.B2;
  Matrix Ct(m, n);
  Ct << w.C1, w.C2;
  Matrix Aexp = Matrix::Zero(n, n);
  Aexp.topLeftCorner(r, r) = w.A11;
  Aexp.bottomRightCorner(k, k).setIdentity();
  Matrix JR = Jh - Rh;
  if (general) JR -= Bt * Bt.transpose();
  out.factor_residual = rel((JR * Xh - Aexp).norm(), JR.norm() * Xh.norm() + Aexp.norm());
  out.output_residual = rel((Bt.transpose() * Xh - Ct).norm(), Bt.norm() * Xh.norm() + Ct.norm());
  out.r_hat_min = lambda_min_sym(Rh) / std::max(Rh.norm(), kTiny);

  const Matrix Si = w.S.fullPivLu().inverse();
  out.J_bar = skew(Si * Jh * Si.transpose());
  out.R_bar = sym(Si * Rh * Si.transpose());
  out.Q_bar = w.S.transpose() * Xh * w.T;
  out.J_hat = std::move(Jh);
  out.R_hat = std::move(Rh);
  out.X_hat = std::move(Xh);
  out.X21 = std::move(X21);
  out.X22 = std::move(X22);

  out.ph = ph;
  out.ph.J = out.J_bar;
  out.ph.R = out.R_bar;
  out.ph.Q = out.Q_bar;

  const Matrix EtQ = ph.E.transpose() * ph.Q;
  out.etq_gain_min = lambda_min_sym(ph.E.transpose() * out.Q_bar - EtQ) / std::max(EtQ.norm(), kTiny);

  const Matrix Pc = solve_control_gare(ph.descriptor());
  out.sigma_hat = improved_char_values(w, X, Pc);
  return out;
}

void check_cert(const OptimizedHamiltonian& o, double tol) {
  if (o.factor_residual > tol || o.output_residual > tol)
    fail(ErrorCode::StructureViolation, "replacement Hamiltonian does not reproduce the realization");
  if (o.r_hat_min < -tol) fail(ErrorCode::StructureViolation, "replacement dissipation is indefinite");
}

}  // namespace

OptimizedHamiltonian optimize_index1(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt) {
  const DecoupledWcf w = to_decoupled_wcf(ph, false);
  const ReducedKypProblem p = build_reduced_kyp(w, KypVariant::Index1);
  const Matrix X = refined_max(p, w.B2, opt);
  OptimizedHamiltonian out = assemble_optimized(ph, w, X, false);
  out.controllable = structural_report(ph.descriptor()).strongly_controllable;
  check_cert(out, opt.cert_tol);
  return out;
}

OptimizedHamiltonian optimize_general(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt) {
  const DecoupledWcf w = to_decoupled_wcf(ph, true);
  const ReducedKypProblem p = build_reduced_kyp(w, KypVariant::General);
  const Matrix X = refined_max(p, w.B2, opt);
  OptimizedHamiltonian out = assemble_optimized(ph, w, X, true);
  out.controllable = structural_report(ph.descriptor()).strongly_controllable;
  check_cert(out, opt.cert_tol);
  return out;
}

OptimizedHamiltonian optimize_hamiltonian(const PortHamiltonianDAE& ph, const HamiltonianOptions& opt) {
  const PencilInfo pi = pencil_spectrum(ph.E, ph.A);
  if (!pi.regular) fail(ErrorCode::SingularPencil, "Hamiltonian replacement needs a regular pencil");
  return pi.impulse_free ? optimize_index1(ph, opt) : optimize_general(ph, opt);
}

Vector improved_char_values(const DecoupledWcf& w, const Matrix& X_max, const Matrix& P_c) {
  const Eigen::Index r = w.r;
  const Matrix Pt = w.S.transpose().fullPivLu().solve(P_c) * w.T.fullPivLu().inverse();
  const Matrix P11 = sym(Pt.topLeftCorner(r, r));
  const Matrix M = X_max.fullPivLu().solve(P11);
  std::vector<double> lam;
  for (const Complex& l : eigenvalues(M)) lam.push_back(l.real());
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double top = lam.empty() ? 0.0 : lam.front();
  std::vector<double> kept;
  for (double l : lam)
    if (l > 1e-12 * top && l > 0) kept.push_back(std::sqrt(l));
  return Eigen::Map<Vector>(kept.data(), static_cast<Eigen::Index>(kept.size()));
}

}  // namespace phlqg

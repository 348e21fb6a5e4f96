#include "phlqg/riccati.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace phlqg {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

Matrix care_residual(const Matrix& A, const Matrix& G, const Matrix& H, const Matrix& X) {
  return A.transpose() * X + X.transpose() * A - X.transpose() * G * X + H;
}

double care_scale(const Matrix& A, const Matrix& G, const Matrix& H, const Matrix& X) {
  return std::max(2.0 * (A.transpose() * X).norm() + (X.transpose() * G * X).norm() + H.norm(), kTiny);
}

bool all_stable(const std::vector<Complex>& ev, double margin) {
  return std::all_of(ev.begin(), ev.end(), [&](Complex l) { return l.real() < -margin; });
}

// Core of the deflating-subspace solve on a semi-explicit problem whose
// trailing helper ARE is known to be solvable with solution P0.
Matrix deflating_solution(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H, int r,
                          const Matrix& P0, const GareOptions& opt, GareDiagnostics* diag) {
  const Eigen::Index n = A.rows();
  const Eigen::Index k = n - r;
  const EvenPencil ep = control_even_pencil(E, A, G, H);
  const Eigen::Index N = 2 * n;

  static constexpr std::array<double, 8> kShifts = {1.0,    0.7371, 1.6180, 0.4142,
                                                    2.2361, 3.1416, 0.2718, 5.0};
  const double rho = std::max(ep.script_A.norm() / std::max(ep.script_E.norm(), kTiny), 1e-8);
  auto rcond_at = [&](double s) {
    Eigen::BDCSVD<Matrix> svd(s * ep.script_E - ep.script_A);
    const auto& sv = svd.singularValues();
    return sv(0) > 0 ? sv(N - 1) / sv(0) : 0.0;
  };
  double s0 = rho * kShifts[0];
  if (opt.shift_index >= 0) {
    s0 = rho * kShifts[static_cast<std::size_t>(opt.shift_index) % kShifts.size()];
  } else {
    double best = -1.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double rc = rcond_at(rho * kShifts[i]);
      if (rc > best) {
        best = rc;
        s0 = rho * kShifts[i];
      }
    }
  }
  const Matrix F = (s0 * ep.script_E - ep.script_A).fullPivLu().solve(ep.script_E);

  // The 2r largest |mu| belong to finite eigenvalues, the rest to infinity.
  std::vector<Complex> mu = eigenvalues(F);
  std::sort(mu.begin(), mu.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
  const std::size_t nfin = static_cast<std::size_t>(2 * r);
  double thr = 0.0;
  if (nfin < mu.size()) {
    const double lo = std::abs(mu[nfin]), hi = std::abs(mu[nfin - 1]);
    if (lo >= 0.5 * hi) fail(ErrorCode::NoStabilizingSolution, "finite and infinite spectrum not separated");
    thr = std::sqrt(std::max(lo, kTiny) * hi);
  }
  int stable = 0;
  for (std::size_t i = 0; i < nfin; ++i) {
    const Complex lam = s0 - 1.0 / mu[i];
    if (std::abs(lam.real()) < opt.margin * (1.0 + std::abs(lam)))
      fail(ErrorCode::NoStabilizingSolution, "eigenvalue inside the imaginary-axis band");
    if (lam.real() < 0) ++stable;
  }
  if (stable != r)
    fail(ErrorCode::NoStabilizingSolution,
         "stable deflating subspace has dimension " + std::to_string(stable) + ", expected " + std::to_string(r));

  const auto sub = ordered_invariant_subspace(F, [&](Complex m) {
    if (std::abs(m) < thr || m == Complex(0.0)) return false;
    return (s0 - 1.0 / m).real() < 0;
  });
  if (sub.count != r) fail(ErrorCode::NoStabilizingSolution, "reordered subspace has wrong dimension");
  const Matrix& Z = sub.basis;

  // Basis of the form [P X; -X].
  const Matrix X1 = -Z.middleRows(n, r);
  const Matrix X2 = -Z.bottomRows(k);
  const double condX1 = condition_number(X1);
  if (!(condX1 < 1e12)) fail(ErrorCode::SingularV21, "leading block of the deflating subspace is singular");
  const auto lu = X1.transpose().fullPivLu();
  Matrix P = Matrix::Zero(n, n);
  P.topLeftCorner(r, r) = sym(lu.solve(Z.topRows(r).transpose()).transpose());
  P.bottomLeftCorner(k, r) = lu.solve((Z.middleRows(r, k) - P0 * X2).transpose()).transpose();
  P.bottomRightCorner(k, k) = P0;

  if (diag) {
    const Matrix Tm = Z.transpose() * F * Z;
    const Matrix Js = s0 * Matrix::Identity(r, r) - Tm.inverse();
    const double sc = ep.script_A.norm() + ep.script_E.norm() * Js.norm();
    diag->shift = s0;
    diag->cond_V21 = condX1;
    diag->subspace_residual = (ep.script_A * Z - ep.script_E * Z * Js).norm() / std::max(sc, kTiny);
  }
  return P;
}

// Handles a general E by the semi-explicit transformation.
Matrix gare_any(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H,
                const GareOptions& opt, GareDiagnostics* diag) {
  if (is_semi_explicit(E)) return solve_gare(E, A, G, H, opt, diag);
  int r = 0;
  auto [S, T] = semi_explicit_transform(E, &r);
  const Matrix Ti = T.fullPivLu().inverse();
  const Eigen::Index n = E.rows();
  Matrix Et = Matrix::Zero(n, n);
  Et.topLeftCorner(r, r).setIdentity();
  const Matrix Pt = solve_gare(Et, S * A * Ti, S * G * S.transpose(), Ti.transpose() * H * Ti, opt, diag);
  return S.transpose() * Pt * T;
}

}  // namespace

Matrix solve_care(const Matrix& A, const Matrix& G, const Matrix& H, double margin) {
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);
  Matrix Ham(2 * n, 2 * n);
  Ham << A, -G, -H, -A.transpose();
  const auto sub = ordered_invariant_subspace(
      Ham, [&](Complex l) { return l.real() < -margin * (1.0 + std::abs(l)); });
  if (sub.count != n)
    fail(ErrorCode::NoStabilizingSolution,
         "stable invariant subspace has dimension " + std::to_string(sub.count) + ", expected " + std::to_string(n));
  const Matrix U1 = sub.basis.topRows(n), U2 = sub.basis.bottomRows(n);
  if (!(condition_number(U1) < 1e12)) fail(ErrorCode::NoStabilizingSolution, "singular leading block");
  Matrix X = sym(U1.transpose().fullPivLu().solve(U2.transpose()).transpose());

  // Newton polish; each step is accepted only if it lowers the residual.
  double res = care_residual(A, G, H, X).norm();
  for (int it = 0; it < 3; ++it) {
    if (res <= 1e-15 * care_scale(A, G, H, X)) break;
    Matrix Xn;
    try {
      Xn = sym(X + solve_lyapunov(A - G * X, care_residual(A, G, H, X)));
    } catch (const Error&) {
      break;
    }
    const double rn = care_residual(A, G, H, Xn).norm();
    if (!(rn < res)) break;
    X = std::move(Xn);
    res = rn;
  }
  if (!all_stable(eigenvalues(A - G * X), 0.0))
    fail(ErrorCode::NoStabilizingSolution, "closed loop is not stable");
  if (res > 1e-8 * care_scale(A, G, H, X))
    fail(ErrorCode::NoStabilizingSolution, "residual " + std::to_string(res) + " too large");
  return X;
}

EvenPencil control_even_pencil(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H) {
  const Eigen::Index n = A.rows();
  EvenPencil ep;
  ep.script_E = Matrix::Zero(2 * n, 2 * n);
  ep.script_E.topRightCorner(n, n) = -E;
  ep.script_E.bottomLeftCorner(n, n) = E.transpose();
  ep.script_A.resize(2 * n, 2 * n);
  ep.script_A << -G, -A, -A.transpose(), H;
  return ep;
}

Matrix solve_gare(const Matrix& E, const Matrix& A, const Matrix& G, const Matrix& H,
                  const GareOptions& opt, GareDiagnostics* diag) {
  int r = 0;
  if (!is_semi_explicit(E, &r)) fail(ErrorCode::InvalidArgument, "solve_gare needs a semi-explicit E");
  const Eigen::Index n = A.rows();
  const Eigen::Index k = n - r;
  Matrix P;
  if (k == 0) {
    P = solve_care(A, G, H, opt.margin);
    if (diag) *diag = GareDiagnostics{};
  } else {
    // The trailing helper ARE is tried as is; if it has no stabilizing
    // solution, the trailing rows are rotated by the polar factor of A22,
    // which makes the trailing block symmetric negative semidefinite.
    const Matrix A22 = A.bottomRightCorner(k, k);
    Matrix P0;
    bool pre = false;
    try {
      P0 = solve_care(A22, G.bottomRightCorner(k, k), H.bottomRightCorner(k, k), opt.margin);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoStabilizingSolution) throw;
      pre = true;
    }
    if (!pre) {
      P = deflating_solution(E, A, G, H, r, P0, opt, diag);
    } else {
      Eigen::BDCSVD<Matrix> svd(A22, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix W = svd.matrixU() * svd.matrixV().transpose();
      Matrix S = Matrix::Identity(n, n);
      S.bottomRightCorner(k, k) = -W.transpose();
      const Matrix At = S * A, Gt = S * G * S.transpose();
      P0 = solve_care(At.bottomRightCorner(k, k), Gt.bottomRightCorner(k, k), H.bottomRightCorner(k, k),
                      opt.margin);
      P = S.transpose() * deflating_solution(E, At, Gt, H, r, P0, opt, diag);
      P.topRightCorner(r, k).setZero();
    }
    if (diag) diag->preconditioned = pre;
  }

  if (opt.certify) {
    const double res = care_residual(A, G, H, P).norm();
    if (res > opt.residual_tol * care_scale(A, G, H, P))
      fail(ErrorCode::ResidualTooLarge, "GARE residual " + std::to_string(res));
    if (!is_stable_impulse_free(E, A - G * P))
      fail(ErrorCode::NoStabilizingSolution, "closed-loop pencil is not stable and impulse-free");
  }
  return P;
}

Matrix solve_control_gare(const DescriptorSystem& sys, const GareOptions& opt, GareDiagnostics* diag) {
  check_dimensions(sys);
  return gare_any(sys.E, sys.A, sys.B * sys.B.transpose(), sys.C.transpose() * sys.C, opt, diag);
}

Matrix solve_filter_gare(const PortHamiltonianDAE& ph) {
  if (ph.n() > 0 && !(condition_number(ph.Q) <= 1e12))
    fail(ErrorCode::IllConditionedQ, "cond(Q) exceeds 1e12");
  const Matrix Pf = ph.Q.fullPivLu().inverse().transpose();
  const DescriptorSystem sys = ph.descriptor();
  const auto res = gare_residuals(sys, ph.R, Matrix::Zero(ph.n(), ph.n()), Pf, GareVariant::Modified);
  if (res.residual_f > 1e-8 * res.scale_f)
    fail(ErrorCode::ResidualTooLarge, "filter GARE residual " + std::to_string(res.residual_f));
  const Matrix EPt = ph.E * Pf.transpose();
  if (res.sym_f > 1e-8 * std::max(EPt.norm(), kTiny) || lambda_min_sym(EPt) < -1e-8 * EPt.norm())
    fail(ErrorCode::ResidualTooLarge, "E P_f^T is not symmetric positive semidefinite");
  return Pf;
}

Matrix solve_filter_gare_deflating(const PortHamiltonianDAE& ph, const GareOptions& opt) {
  const DescriptorSystem d = ph.descriptor().dual();
  const Matrix H = ph.B * ph.B.transpose() + 2.0 * ph.R;
  // d.B = C^T, so G = C^T C; the control-type solution is P_f^T.
  return gare_any(d.E, d.A, d.B * d.B.transpose(), H, opt, nullptr).transpose();
}

GareSolutionPair solve_original_gares(const DescriptorSystem& sys, const GareOptions& opt) {
  GareSolutionPair out;
  out.variant = GareVariant::Original;
  out.P_c = solve_control_gare(sys, opt);
  out.P_f = solve_control_gare(sys.dual(), opt).transpose();
  const auto res = gare_residuals(sys, Matrix(), out.P_c, out.P_f, GareVariant::Original);
  out.residual_c = res.residual_c;
  out.residual_f = res.residual_f;
  out.stabilizing_c = is_stabilizing(sys, out.P_c, GareSide::Control);
  out.stabilizing_f = is_stabilizing(sys, out.P_f, GareSide::Filter);
  return out;
}

GareSolutionPair solve_modified_gares(const PortHamiltonianDAE& ph, const GareOptions& opt) {
  GareSolutionPair out;
  out.variant = GareVariant::Modified;
  const DescriptorSystem sys = ph.descriptor();
  out.P_c = solve_control_gare(sys, opt);
  out.P_f = solve_filter_gare(ph);
  const auto res = gare_residuals(sys, ph.R, out.P_c, out.P_f, GareVariant::Modified);
  out.residual_c = res.residual_c;
  out.residual_f = res.residual_f;
  out.stabilizing_c = is_stabilizing(sys, out.P_c, GareSide::Control);
  out.stabilizing_f = is_stabilizing(sys, out.P_f, GareSide::Filter, ph.R);
  return out;
}

GareResiduals gare_residuals(const DescriptorSystem& sys, const Matrix& R, const Matrix& P_c,
                             const Matrix& P_f, GareVariant variant) {
  const Matrix& E = sys.E;
  const Matrix& A = sys.A;
  const Matrix BBt = sys.B * sys.B.transpose();
  const Matrix CtC = sys.C.transpose() * sys.C;
  GareResiduals out;
  const Matrix AtP = A.transpose() * P_c;
  const Matrix PGP = P_c.transpose() * BBt * P_c;
  out.residual_c = (AtP + AtP.transpose() - PGP + CtC).norm();
  out.scale_c = std::max(2 * AtP.norm() + PGP.norm() + CtC.norm(), kTiny);
  out.sym_c = (E.transpose() * P_c - P_c.transpose() * E).norm();

  const Matrix APt = A * P_f.transpose();
  const Matrix PCP = P_f * CtC * P_f.transpose();
  Matrix Hf = BBt;
  if (variant == GareVariant::Modified && R.size() > 0) Hf += 2.0 * R;
  out.residual_f = (APt + APt.transpose() - PCP + Hf).norm();
  out.scale_f = std::max(2 * APt.norm() + PCP.norm() + Hf.norm(), kTiny);
  out.sym_f = (E * P_f.transpose() - P_f * E.transpose()).norm();
  return out;
}

bool is_stable_impulse_free(const Matrix& E, const Matrix& A, double margin) {
  const Eigen::Index n = A.rows();
  int r = 0;
  if (is_semi_explicit(E, &r)) {
    const Eigen::Index k = n - r;
    if (k == 0) return all_stable(eigenvalues(A), margin);
    const Matrix A22 = A.bottomRightCorner(k, k);
    if (!(condition_number(A22) < 1e12)) return false;
    const Matrix M = A.topLeftCorner(r, r) -
                     A.topRightCorner(r, k) * A22.fullPivLu().solve(A.bottomLeftCorner(k, r));
    return all_stable(eigenvalues(M), margin);
  }
  const PencilInfo pi = pencil_spectrum(E, A);
  return pi.regular && pi.impulse_free && all_stable(pi.finite_eigenvalues, margin);
}

bool is_stabilizing(const DescriptorSystem& sys, const Matrix& P, GareSide side, const Matrix& R) {
  check_dimensions(sys);
  const Eigen::Index n = sys.n();
  const bool control = side == GareSide::Control;
  const Matrix Z = Matrix::Zero(n, n);
  const auto res = control ? gare_residuals(sys, R, P, Z, GareVariant::Original)
                           : gare_residuals(sys, R, Z, P, R.size() ? GareVariant::Modified : GareVariant::Original);
  const double resid = control ? res.residual_c : res.residual_f;
  const double scale = control ? res.scale_c : res.scale_f;
  const double symr = control ? res.sym_c : res.sym_f;
  if (resid > 1e-8 * scale) return false;  // not a solution at all

  const Matrix EP = control ? Matrix(sys.E.transpose() * P) : Matrix(sys.E * P.transpose());
  const double tol = 1e-8 * std::max(EP.norm(), kTiny);
  const bool psd = symr <= tol && lambda_min_sym(EP) >= -tol;
  const Matrix Acl = control ? Matrix(sys.A - sys.B * sys.B.transpose() * P)
                             : Matrix(sys.A - P * sys.C.transpose() * sys.C);
  const bool spectral = is_stable_impulse_free(sys.E, Acl);
  if (psd != spectral)
    fail(ErrorCode::InconsistentCertificates,
         std::string("semidefiniteness test says ") + (psd ? "yes" : "no") + ", closed-loop spectrum says " +
             (spectral ? "yes" : "no"));
  return psd;
}

}  // namespace phlqg

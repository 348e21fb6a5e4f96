#include "phlqg/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "phlqg/riccati.hpp"

namespace phlqg {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double sigma_max(const CMatrix& G) {
  if (G.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(G);
  return svd.singularValues()(0);
}

double sigma_max(const Matrix& G) {
  if (G.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(G);
  return svd.singularValues()(0);
}

}  // namespace

CoprimeRealization coprime_realization(const DescriptorSystem& sys, const Matrix& P_c) {
  check_dimensions(sys);
  const Eigen::Index n = sys.n(), m = sys.m(), p = sys.p();
  CoprimeRealization cr;
  cr.E = sys.E;
  cr.A = sys.A - sys.B * sys.B.transpose() * P_c;
  cr.B = sys.B;
  cr.C.resize(m + p, n);
  cr.C << -sys.B.transpose() * P_c, sys.C;
  cr.D = Matrix::Zero(m + p, m);
  cr.D.topRows(m).setIdentity();
  if (n > 0 && !is_stable_impulse_free(cr.E, cr.A))
    fail(ErrorCode::NotStabilizing, "A - BB^T P_c is not stable and impulse-free");
  return cr;
}

OdeRealization dae_to_ode(const DescriptorSystem& sys, const Matrix& D) {
  check_dimensions(sys);
  const Matrix D0 = D.size() ? D : Matrix(Matrix::Zero(sys.p(), sys.m()));
  int r = 0;
  DescriptorSystem s = sys;
  if (!is_semi_explicit(sys.E, &r)) {
    auto se = to_semi_explicit(sys);
    s = std::move(se.sys);
    r = se.r;
  }
  const Eigen::Index k = s.n() - r;
  OdeRealization out;
  if (k == 0) {
    out = {s.A, s.B, s.C, D0};
    return out;
  }
  const Matrix A22 = s.A.bottomRightCorner(k, k);
  if (!(condition_number(A22) < 1e12)) fail(ErrorCode::SingularA22, "A22 is singular");
  const auto lu = A22.fullPivLu();
  const Matrix XA = lu.solve(s.A.bottomLeftCorner(k, r));
  const Matrix XB = lu.solve(s.B.bottomRows(k));
  out.A = s.A.topLeftCorner(r, r) - s.A.topRightCorner(r, k) * XA;
  out.B = s.B.topRows(r) - s.A.topRightCorner(r, k) * XB;
  out.C = s.C.leftCols(r) - s.C.rightCols(k) * XA;
  out.D = D0 - s.C.rightCols(k) * XB;
  return out;
}

OdeRealization dae_to_ode(const CoprimeRealization& cr) {
  return dae_to_ode(DescriptorSystem{cr.E, cr.A, cr.B, cr.C}, cr.D);
}

CMatrix frequency_response(const OdeRealization& sys, double omega) {
  const Eigen::Index n = sys.A.rows();
  return transfer(Matrix::Identity(n, n), sys.A, sys.B, sys.C, sys.D, Complex(0.0, omega));
}

double hinf_norm(const OdeRealization& sys, double tol) {
  const Eigen::Index n = sys.A.rows(), m = sys.B.cols(), p = sys.C.rows();
  const double dnorm = sigma_max(sys.D);
  if (n == 0) return dnorm;
  const std::vector<Complex> poles = eigenvalues(sys.A);
  for (const Complex& l : poles)
    if (!(l.real() < 0)) fail(ErrorCode::UnstableSystem, "H-infinity norm needs a stable realization");

  // Seed: zero frequency, pole moduli and damped peaks, a log grid.
  std::vector<double> seeds{0.0};
  double wlo = std::numeric_limits<double>::infinity(), whi = 0;
  for (const Complex& l : poles) {
    const double a = std::abs(l);
    seeds.push_back(a);
    if (std::abs(l.imag()) > 0) seeds.push_back(std::abs(l.imag()));
    wlo = std::min(wlo, a);
    whi = std::max(whi, a);
  }
  for (double w : log_frequencies(std::max(wlo * 0.1, 1e-12), whi * 10.0, 40)) seeds.push_back(w);
  double gamma_lb = dnorm;
  for (double w : seeds) gamma_lb = std::max(gamma_lb, sigma_max(frequency_response(sys, w)));
  if (gamma_lb == 0) return 0.0;

  const Matrix DtD = sys.D.transpose() * sys.D, DDt = sys.D * sys.D.transpose();
  for (int it = 0; it < 50; ++it) {
    const double g = (1.0 + 2.0 * tol) * gamma_lb;
    const Matrix Rg = DtD - g * g * Matrix::Identity(m, m);
    const Matrix Sg = DDt - g * g * Matrix::Identity(p, p);
    const auto rlu = Rg.fullPivLu();
    const Matrix RiDtC = rlu.solve(sys.D.transpose() * sys.C);
    const Matrix RiBt = rlu.solve(sys.B.transpose());
    const Matrix F = sys.A - sys.B * RiDtC;
    Matrix H(2 * n, 2 * n);
    H << F, -g * sys.B * RiBt, g * sys.C.transpose() * Sg.fullPivLu().solve(sys.C), -F.transpose();
    const double hs = H.norm();
    std::vector<double> w;
    for (const Complex& l : eigenvalues(H))
      if (std::abs(l.real()) <= 1e-7 * std::max(std::abs(l), 1e-6 * hs) && l.imag() >= 0) w.push_back(l.imag());
    if (w.empty()) break;
    std::sort(w.begin(), w.end());
    double best = gamma_lb;
    for (std::size_t i = 0; i < w.size(); ++i) {
      best = std::max(best, sigma_max(frequency_response(sys, w[i])));
      if (i + 1 < w.size()) best = std::max(best, sigma_max(frequency_response(sys, 0.5 * (w[i] + w[i + 1]))));
    }
    if (!(best > gamma_lb * (1.0 + 0.1 * tol))) break;
    gamma_lb = best;
  }
  return gamma_lb;
}

double error_bound(const Vector& sigma, int ell) {
  if (ell < 0 || ell > sigma.size()) fail(ErrorCode::InvalidArgument, "ell outside 0..k");
  double s = 0;
  for (Eigen::Index i = ell; i < sigma.size(); ++i) s += sigma(i) / std::sqrt(1.0 + sigma(i) * sigma(i));
  return 2.0 * s;
}

double coprime_error(const DescriptorSystem& fom, const DescriptorSystem& rom, const Matrix& P_c,
                     const Matrix& P_c_rom, double tol) {
  const OdeRealization f = dae_to_ode(coprime_realization(fom, P_c));
  OdeRealization r;
  if (rom.n() == 0) {
    const Eigen::Index m = fom.m(), p = fom.p();
    r.A = Matrix(0, 0);
    r.B = Matrix(0, m);
    r.C = Matrix(m + p, 0);
    r.D = Matrix::Zero(m + p, m);
    r.D.topRows(m).setIdentity();
  } else {
    if (!pencil_spectrum(rom.E, rom.A).regular)
      fail(ErrorCode::SingularReducedPencil, "reduced pencil is singular");
    r = dae_to_ode(coprime_realization(rom, P_c_rom));
  }
  const Eigen::Index nf = f.A.rows(), nr = r.A.rows();
  OdeRealization d;
  d.A = block_diag(f.A, r.A);
  d.B.resize(nf + nr, f.B.cols());
  d.B << f.B, r.B;
  d.C.resize(f.C.rows(), nf + nr);
  d.C << f.C, -r.C;
  d.D = f.D - r.D;
  return hinf_norm(d, tol);
}

double normalization_error(const CoprimeRealization& cr, const std::vector<double>& omegas) {
  const Eigen::Index m = cr.m();
  double worst = 0;
  for (double w : omegas) {
    const CMatrix G = transfer(cr.E, cr.A, cr.B, cr.C, cr.D, Complex(0.0, w));
    const CMatrix Z = G.adjoint() * G - CMatrix::Identity(m, m);
    Eigen::JacobiSVD<CMatrix> svd(Z);
    worst = std::max(worst, svd.singularValues()(0));
  }
  return worst;
}

std::vector<double> log_frequencies(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  return out;
}

CoprimeLyapReport verify_coprime_lyap(const DescriptorSystem& sys, const Matrix& P_c, const Matrix& P_f,
                                      double tol) {
  const Eigen::Index n = sys.n();
  CoprimeLyapReport rep;
  const Matrix IPP = Matrix::Identity(n, n) + P_f * P_c.transpose();
  if (!(condition_number(IPP) < 1e12)) fail(ErrorCode::SingularI_PfPc, "I + P_f P_c^T is singular");
  const Matrix L = IPP.fullPivLu().solve(P_f);
  const Matrix Apc = sys.A - sys.B * sys.B.transpose() * P_c;
  const Matrix BBt = sys.B * sys.B.transpose();
  const Matrix AL = Apc * L.transpose();
  rep.lyap_max = lambda_max_sym(AL + AL.transpose() + BBt);
  rep.lyap_scale = std::max(2.0 * AL.norm() + BBt.norm(), kTiny);
  const Matrix EL = sys.E * L.transpose();
  rep.sym_residual = (EL - EL.transpose()).norm() / std::max(EL.norm(), kTiny);
  Matrix K(n, sys.m() + sys.p());
  K << -P_c.transpose() * sys.B, sys.C.transpose();
  const Matrix AP = Apc.transpose() * P_c;
  const Matrix KK = K * K.transpose();
  rep.gare_residual = (AP + AP.transpose() + KK).norm() / std::max(2.0 * AP.norm() + KK.norm(), kTiny);
  rep.pass = rep.lyap_max <= tol * rep.lyap_scale && rep.sym_residual <= tol && rep.gare_residual <= tol;
  return rep;
}

ControllerReport lqg_controller(const PortHamiltonianDAE& ph, const Matrix& P_c, double tol) {
  const Eigen::Index n = ph.n();
  const Matrix Qit = ph.Q.fullPivLu().inverse().transpose();
  ControllerReport rep;
  DescriptorSystem& c = rep.controller;
  c.E = ph.E;
  c.A = ph.A - ph.B * ph.B.transpose() * P_c - Qit * ph.C.transpose() * ph.C;
  c.B = Qit * ph.C.transpose();
  c.C = ph.B.transpose() * P_c;

  rep.E_cl = block_diag(ph.E, ph.E);
  rep.A_cl.resize(2 * n, 2 * n);
  rep.A_cl << ph.A, -ph.B * c.C, c.B * ph.C, c.A;
  const PencilInfo pi = pencil_spectrum(rep.E_cl, rep.A_cl);
  rep.regular = pi.regular;
  rep.impulse_free = pi.regular && pi.impulse_free;
  rep.stable = rep.impulse_free;
  for (const Complex& l : pi.finite_eigenvalues)
    if (!(l.real() < 0)) rep.stable = false;

  const Matrix W = kyp_block(c, P_c);
  const Matrix AtP = c.A.transpose() * P_c;
  const double scale = std::max(2.0 * AtP.norm() + c.C.norm() + (P_c.transpose() * c.B).norm(), kTiny);
  rep.kyp_min = lambda_min_sym(W) / scale;
  const Matrix EtP = ph.E.transpose() * P_c;
  rep.etp_min = n ? lambda_min_sym(sym(EtP)) / std::max(EtP.norm(), kTiny) : 0.0;
  rep.passive = rep.kyp_min >= -tol && rep.etp_min >= -tol &&
                (EtP - EtP.transpose()).norm() <= tol * std::max(EtP.norm(), kTiny);
  return rep;
}

}  // namespace phlqg

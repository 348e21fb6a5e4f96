#include "phlqg/balancing.hpp"

#include <algorithm>
#include <cmath>

#include "phlqg/riccati.hpp"

namespace phlqg {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

struct Projection {
  Vector sigma;
  Matrix S, T, W;
  int r = 0;
};

Projection project(const Matrix& E, const Matrix& P_c, const Matrix& P_f, int ell,
                   const BalanceOptions& opt) {
  const Eigen::Index n = E.rows();
  Eigen::BDCSVD<Matrix> esvd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& es = esvd.singularValues();
  Eigen::Index r = 0;
  if (es.size() > 0 && es(0) > 0)
    for (Eigen::Index i = 0; i < es.size(); ++i)
      if (es(i) > opt.rank_tol * es(0)) ++r;
  const Matrix U2 = esvd.matrixU().rightCols(n - r);
  const Matrix V2 = esvd.matrixV().rightCols(n - r);
  const Matrix Ep = esvd.matrixV().leftCols(r) * es.head(r).cwiseInverse().asDiagonal() *
                    esvd.matrixU().leftCols(r).transpose();

  const Matrix Lc = psd_factor(sym(E.transpose() * P_c));
  const Matrix Lf = psd_factor(sym(E * P_f.transpose()));
  const Matrix M = Lc.transpose() * Ep * Lf;
  Eigen::BDCSVD<Matrix> msvd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = msvd.singularValues();
  Eigen::Index k = 0;
  if (s.size() > 0 && s(0) > 0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > opt.rank_tol * s(0)) ++k;

  Projection out;
  out.sigma = s.head(k);
  out.r = static_cast<int>(r);
  if (ell < 1 || ell > k)
    fail(ErrorCode::InvalidArgument, "ell = " + std::to_string(ell) + " outside 1.." + std::to_string(k));
  if (ell < k && !(s(ell - 1) - s(ell) > opt.gap_tol * s(ell - 1)))
    fail(ErrorCode::GapTooSmall, "sigma_ell and sigma_ell+1 coincide");

  const Vector isq = s.head(ell).cwiseSqrt().cwiseInverse();
  const Matrix Ul = msvd.matrixU().leftCols(ell) * isq.asDiagonal();
  const Matrix Vl = msvd.matrixV().leftCols(ell) * isq.asDiagonal();
  const Eigen::Index nr = ell + (n - r);
  out.S.resize(n, nr);
  out.T.resize(n, nr);
  out.W.resize(n, nr);
  out.S << Ep.transpose() * Lc * Ul, U2;
  out.T << Ep * Lf * Vl, V2;
  out.W << E * Ep * Lf * Vl, U2;
  return out;
}

// S^T E T is diag(I_ell, 0) in exact arithmetic; store the exact pattern.
Matrix reduced_e(const Matrix& E, const Projection& p, int ell) {
  const Matrix Er = p.S.transpose() * E * p.T;
  Matrix exact = Matrix::Zero(Er.rows(), Er.cols());
  exact.topLeftCorner(ell, ell).setIdentity();
  if ((Er - exact).norm() > 1e-6 * std::max(1.0, std::sqrt(static_cast<double>(ell))))
    fail(ErrorCode::StructureViolation, "projected E is not semi-explicit");
  return exact;
}

void certify_regular(BalancedTruncationResult& res) {
  const PencilInfo pi = pencil_spectrum(res.rom_sys.E, res.rom_sys.A);
  res.rom_regular = pi.regular;
  if (!pi.regular) fail(ErrorCode::SingularReducedPencil, "reduced pencil is singular");
}

}  // namespace

Vector characteristic_values(const DescriptorSystem& sys, const Matrix& P_c, const Matrix& P_f) {
  int r = 0;
  Matrix Pc = P_c, Pf = P_f;
  if (!is_semi_explicit(sys.E, &r)) {
    const auto [S, T] = semi_explicit_transform(sys.E, &r);
    const Matrix Ti = T.fullPivLu().inverse();
    Pc = S.transpose().fullPivLu().solve(P_c) * Ti;
    Pf = S * P_f * T.transpose();
  }
  // eig(Pf11 Pc11^T) = sv(Lc^T Lf)^2; the factored form keeps rounding noise in the
  // null directions of Pc11 out of the small values
  const auto factor = [](const Matrix& P) {
    try {
      return psd_factor(sym(P));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPSD) throw;
      fail(ErrorCode::NegativeEigenvalue, e.what());
    }
  };
  const Matrix Lc = factor(Pc.topLeftCorner(r, r)), Lf = factor(Pf.topLeftCorner(r, r));
  if (Lc.cols() == 0 || Lf.cols() == 0) return Vector(0);
  const Vector s = Eigen::BDCSVD<Matrix>(Lc.transpose() * Lf).singularValues();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) * s(i) > 1e-12 * s(0) * s(0)) out.push_back(s(i));
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

BalancedTruncationResult balance_truncate(const PortHamiltonianDAE& ph, int ell, const BalanceOptions& opt) {
  return balance_truncate(ph, ell, solve_control_gare(ph.descriptor()), solve_filter_gare(ph), opt);
}

BalancedTruncationResult balance_truncate(const PortHamiltonianDAE& ph, int ell, const Matrix& Pc,
                                          const Matrix& Pf, const BalanceOptions& opt) {
  const Projection p = project(ph.E, Pc, Pf, ell, opt);

  BalancedTruncationResult res;
  res.sigma = p.sigma;
  res.ell = ell;
  res.structured = true;
  PortHamiltonianDAE& rom = res.rom;
  rom.E = reduced_e(ph.E, p, ell);
  if (opt.literal_step5) {
    rom.J = p.S.transpose() * ph.E * p.S;
    if (ph.R.cols() != ph.m()) fail(ErrorCode::InvalidArgument, "literal B_r = S^T R needs m = n");
    rom.B = p.S.transpose() * ph.R;
  } else {
    const Matrix J = p.S.transpose() * ph.J * p.S;
    rom.J = 0.5 * (J - J.transpose());
    rom.B = p.S.transpose() * ph.B;
  }
  rom.R = sym(p.S.transpose() * ph.R * p.S);
  rom.Q = p.W.transpose() * ph.Q * p.T;
  rom.A = (rom.J - rom.R) * rom.Q;
  rom.C = rom.B.transpose() * rom.Q;
  rom.rank_E = ell;
  res.S_l = p.S;
  res.T_l = p.T;
  res.W_l = p.W;
  res.P_c_trunc = p.W.transpose() * Pc * p.T;
  res.rom_sys = rom.descriptor();
  certify_regular(res);
  return res;
}

BalancedTruncationResult classical_lqg_bt(const DescriptorSystem& sys, int ell, const BalanceOptions& opt) {
  const GareSolutionPair g = solve_original_gares(sys);
  return classical_lqg_bt(sys, ell, g.P_c, g.P_f, opt);
}

BalancedTruncationResult classical_lqg_bt(const DescriptorSystem& sys, int ell, const Matrix& Pc,
                                          const Matrix& Pf, const BalanceOptions& opt) {
  const Projection p = project(sys.E, Pc, Pf, ell, opt);
  BalancedTruncationResult res;
  res.sigma = p.sigma;
  res.ell = ell;
  res.structured = false;
  res.rom_sys.E = reduced_e(sys.E, p, ell);
  res.rom_sys.A = p.S.transpose() * sys.A * p.T;
  res.rom_sys.B = p.S.transpose() * sys.B;
  res.rom_sys.C = sys.C * p.T;
  res.S_l = p.S;
  res.T_l = p.T;
  res.W_l = p.W;
  res.P_c_trunc = p.W.transpose() * Pc * p.T;
  certify_regular(res);
  return res;
}

RomStructureReport check_rom_structure(const PortHamiltonianDAE& rom, double tol) {
  RomStructureReport rep;
  const auto scale = [](const Matrix& M) { return std::max(M.norm(), kTiny); };
  rep.skew = (rom.J + rom.J.transpose()).norm() / scale(rom.J);
  rep.r_min = rom.R.size() ? lambda_min_sym(rom.R) : 0.0;
  const Matrix EtQ = rom.E.transpose() * rom.Q;
  rep.etq_sym = (EtQ - EtQ.transpose()).norm() / scale(EtQ);
  rep.etq_min = EtQ.size() ? lambda_min_sym(EtQ) : 0.0;
  rep.output = (rom.C - rom.B.transpose() * rom.Q).norm() /
               std::max(rom.B.norm() * rom.Q.norm() + rom.C.norm(), kTiny);
  const Matrix JR = rom.J - rom.R;
  rep.a_residual = (rom.A - JR * rom.Q).norm() / std::max(JR.norm() * rom.Q.norm() + rom.A.norm(), kTiny);
  rep.pass = rep.skew <= 1e-12 && rep.r_min >= -tol * scale(rom.R) && rep.etq_sym <= tol &&
             rep.etq_min >= -tol * scale(EtQ) && rep.output <= tol && rep.a_residual <= tol;
  return rep;
}

RomStructureReport check_rom_structure(const BalancedTruncationResult& res, double tol) {
  if (!res.structured) fail(ErrorCode::InvalidArgument, "classical ROM carries no port-Hamiltonian data");
  return check_rom_structure(res.rom, tol);
}

}  // namespace phlqg

#include "phlqg/model.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace phlqg {

namespace {

double rel_scale(const Matrix& M) { return std::max(M.norm(), std::numeric_limits<double>::min()); }

void require_square(const Matrix& M, Eigen::Index n, const char* name) {
  if (M.rows() != n || M.cols() != n)
    fail(ErrorCode::InvalidArgument, std::string(name) + " must be " + std::to_string(n) + "x" +
                                         std::to_string(n));
}

Matrix checked_inverse(const Matrix& M, const char* name) {
  if (M.rows() != M.cols()) fail(ErrorCode::SingularTransformation, std::string(name) + " not square");
  if (M.rows() == 0) return M;
  if (condition_number(M) > 1e12)
    fail(ErrorCode::SingularTransformation, std::string(name) + " is numerically singular");
  return M.fullPivLu().inverse();
}

int complex_rank(const CMatrix& M, double abs_tol) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<CMatrix> svd(M);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > abs_tol) ++r;
  return r;
}

bool impulse_controllable(const DescriptorSystem& s, double tol) {
  const Eigen::Index n = s.n();
  const Matrix K = null_space(s.E, kRankTol);
  Matrix M(n, n + K.cols() + s.m());
  M << s.E, s.A * K, s.B;
  return numerical_rank(M, tol) == n;
}

// Rank of [lambda E - A, B] at every finite eigenvalue accepted by `in_region`.
bool hautus(const DescriptorSystem& s, const PencilInfo& pi, double tol,
            const std::function<bool(Complex)>& in_region) {
  const Eigen::Index n = s.n();
  for (const Complex& lam : pi.finite_eigenvalues) {
    if (!in_region(lam)) continue;
    CMatrix M(n, n + s.m());
    M << lam * s.E.cast<Complex>() - s.A.cast<Complex>(), s.B.cast<Complex>();
    Eigen::BDCSVD<CMatrix> svd(M);
    const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    if (complex_rank(M, tol * top) < n) return false;
  }
  return true;
}

}  // namespace

void check_dimensions(const DescriptorSystem& sys) {
  const Eigen::Index n = sys.A.rows();
  require_square(sys.A, n, "A");
  require_square(sys.E, n, "E");
  if (sys.B.rows() != n) fail(ErrorCode::InvalidArgument, "B must have n rows");
  if (sys.C.cols() != n) fail(ErrorCode::InvalidArgument, "C must have n columns");
}

void validate(const PortHamiltonianDAE& ph, double tol) {
  const Eigen::Index n = ph.E.rows();
  require_square(ph.E, n, "E");
  require_square(ph.J, n, "J");
  require_square(ph.R, n, "R");
  require_square(ph.Q, n, "Q");
  if (ph.B.rows() != n) fail(ErrorCode::InvalidArgument, "B must have n rows");
  if ((ph.J + ph.J.transpose()).norm() > tol * rel_scale(ph.J))
    fail(ErrorCode::StructureViolation, "J is not skew-symmetric");
  if ((ph.R - ph.R.transpose()).norm() > tol * rel_scale(ph.R))
    fail(ErrorCode::StructureViolation, "R is not symmetric");
  if (lambda_min_sym(ph.R) < -tol * rel_scale(ph.R))
    fail(ErrorCode::StructureViolation, "R is not positive semidefinite");
  const Matrix EtQ = ph.E.transpose() * ph.Q;
  if ((EtQ - EtQ.transpose()).norm() > tol * rel_scale(EtQ))
    fail(ErrorCode::StructureViolation, "E^T Q is not symmetric");
  if (lambda_min_sym(EtQ) < -tol * rel_scale(EtQ))
    fail(ErrorCode::StructureViolation, "E^T Q is not positive semidefinite");
}

PortHamiltonianDAE assemble(const Matrix& E, const Matrix& J, const Matrix& R, const Matrix& Q,
                            const Matrix& B, double tol) {
  PortHamiltonianDAE ph{E, J, R, Q, B, {}, {}, 0};
  validate(ph, tol);
  ph.A = (J - R) * Q;
  ph.C = B.transpose() * Q;
  ph.rank_E = numerical_rank(E, kRankTol);
  return ph;
}

PortHamiltonianDAE transform(const PortHamiltonianDAE& ph, const Matrix& S, const Matrix& T) {
  require_square(S, ph.n(), "S");
  require_square(T, ph.n(), "T");
  const Matrix Si = checked_inverse(S, "S");
  const Matrix Ti = checked_inverse(T, "T");
  return assemble(S * ph.E * Ti, S * ph.J * S.transpose(), S * ph.R * S.transpose(),
                  Si.transpose() * ph.Q * Ti, S * ph.B);
}

DescriptorSystem transform(const DescriptorSystem& sys, const Matrix& S, const Matrix& T) {
  check_dimensions(sys);
  require_square(S, sys.n(), "S");
  require_square(T, sys.n(), "T");
  checked_inverse(S, "S");
  const Matrix Ti = checked_inverse(T, "T");
  return {S * sys.E * Ti, S * sys.A * Ti, S * sys.B, sys.C * Ti};
}

bool is_semi_explicit(const Matrix& E, int* rank) {
  const Eigen::Index n = E.rows();
  Eigen::Index r = 0;
  while (r < n && E(r, r) == 1.0) ++r;
  Matrix expect = Matrix::Zero(n, n);
  expect.topLeftCorner(r, r).setIdentity();
  const bool ok = E.cols() == n && E == expect;
  if (ok && rank) *rank = static_cast<int>(r);
  return ok;
}

std::pair<Matrix, Matrix> semi_explicit_transform(const Matrix& E, int* rank) {
  const Eigen::Index n = E.rows();
  int r0 = 0;
  if (is_semi_explicit(E, &r0)) {
    if (rank) *rank = r0;
    return {Matrix::Identity(n, n), Matrix::Identity(n, n)};
  }
  const int r = numerical_rank(E, kRankTol);
  Eigen::BDCSVD<Matrix> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const Matrix& U = svd.matrixU();
  const Matrix& V = svd.matrixV();
  Matrix S(n, n), T(n, n);
  const Vector root = s.head(r).cwiseSqrt();
  S.topRows(r) = root.cwiseInverse().asDiagonal() * U.leftCols(r).transpose();
  S.bottomRows(n - r) = U.rightCols(n - r).transpose();
  T.topRows(r) = root.asDiagonal() * V.leftCols(r).transpose();
  T.bottomRows(n - r) = V.rightCols(n - r).transpose();
  if (rank) *rank = r;
  return {S, T};
}

SemiExplicit<PortHamiltonianDAE> to_semi_explicit(const PortHamiltonianDAE& ph) {
  int r = 0;
  auto [S, T] = semi_explicit_transform(ph.E, &r);
  PortHamiltonianDAE out = transform(ph, S, T);
  const Eigen::Index n = ph.n();
  out.E.setZero();
  out.E.topLeftCorner(r, r).setIdentity();
  // E^T Q symmetric forces Q12 = 0 and Q11 symmetric.
  out.Q.topRightCorner(r, n - r).setZero();
  out.Q.topLeftCorner(r, r) = sym(out.Q.topLeftCorner(r, r));
  out.A = (out.J - out.R) * out.Q;
  out.C = out.B.transpose() * out.Q;
  out.rank_E = r;
  return {out, S, T, r};
}

SemiExplicit<DescriptorSystem> to_semi_explicit(const DescriptorSystem& sys) {
  int r = 0;
  auto [S, T] = semi_explicit_transform(sys.E, &r);
  DescriptorSystem out = transform(sys, S, T);
  out.E.setZero();
  out.E.topLeftCorner(r, r).setIdentity();
  return {out, S, T, r};
}

PortHamiltonianDAE embed_feedthrough(const Matrix& J_h, const Matrix& R_h, const Matrix& Q_h,
                                     const Matrix& B_h, const Matrix& P_h, const Matrix& S_h,
                                     const Matrix& N_h, double tol) {
  const Eigen::Index n = J_h.rows(), m = B_h.cols();
  require_square(J_h, n, "J_h");
  require_square(R_h, n, "R_h");
  require_square(Q_h, n, "Q_h");
  require_square(S_h, m, "S_h");
  require_square(N_h, m, "N_h");
  if (B_h.rows() != n || P_h.rows() != n || P_h.cols() != m)
    fail(ErrorCode::InvalidArgument, "B_h and P_h must be n x m");

  Matrix Jx(n + m, n + m), Rx(n + m, n + m);
  Jx << J_h, B_h, -B_h.transpose(), N_h;
  Rx << R_h, P_h, P_h.transpose(), S_h;
  if ((Jx + Jx.transpose()).norm() > tol * rel_scale(Jx))
    fail(ErrorCode::StructureViolation, "[[J,B],[-B^T,N]] is not skew-symmetric");
  if ((Rx - Rx.transpose()).norm() > tol * rel_scale(Rx) || lambda_min_sym(Rx) < -tol * rel_scale(Rx))
    fail(ErrorCode::StructureViolation, "[[R,P],[P^T,S]] is not symmetric positive semidefinite");
  if ((Q_h - Q_h.transpose()).norm() > tol * rel_scale(Q_h) || (n > 0 && lambda_min_sym(Q_h) <= 0))
    fail(ErrorCode::StructureViolation, "Q_h is not symmetric positive definite");

  const Eigen::Index N = n + 2 * m;
  Matrix E = Matrix::Zero(N, N), J = Matrix::Zero(N, N), R = Matrix::Zero(N, N);
  Matrix Q = Matrix::Zero(N, N), B = Matrix::Zero(N, m);
  const Matrix Im = Matrix::Identity(m, m);
  E.topLeftCorner(n, n).setIdentity();
  J.topLeftCorner(n, n) = J_h;
  J.block(0, n, n, m) = B_h;
  J.block(n, 0, m, n) = -B_h.transpose();
  J.block(n, n, m, m) = -N_h;
  J.block(n, n + m, m, m) = Im;
  J.block(n + m, n, m, m) = -Im;
  R.topLeftCorner(n + m, n + m) = Rx;
  Q.topLeftCorner(n, n) = Q_h;
  Q.block(n, n + m, m, m) = Im;
  Q.block(n + m, n, m, m) = Im;
  B.bottomRows(m) = Im;
  return assemble(E, J, R, Q, B, tol);
}

PortHamiltonianDAE output_feedback(const PortHamiltonianDAE& ph, int sign, double tol) {
  if (sign != 1 && sign != -1) fail(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  const Matrix BBt = ph.B * ph.B.transpose();
  PortHamiltonianDAE out = ph;
  out.R = sign < 0 ? Matrix(ph.R + BBt) : Matrix(ph.R - BBt);
  const double scale = std::max({ph.R.norm(), BBt.norm(), std::numeric_limits<double>::min()});
  if (sign > 0 && lambda_min_sym(out.R) < -tol * scale)
    fail(ErrorCode::StructureViolation, "undoing the feedback leaves R indefinite");
  out.A = (out.J - out.R) * out.Q;
  out.C = out.B.transpose() * out.Q;
  return out;
}

StructuralReport structural_report(const DescriptorSystem& sys, double tol) {
  check_dimensions(sys);
  const PencilInfo pi = sys.pencil();
  if (!pi.regular) fail(ErrorCode::SingularPencil, "structural_report needs a regular pencil");
  const DescriptorSystem d = sys.dual();
  auto rhp = [](Complex l) { return l.real() >= -1e-9 * (1.0 + std::abs(l)); };
  auto lhp = [](Complex l) { return l.real() <= 1e-9 * (1.0 + std::abs(l)); };

  StructuralReport rep;
  rep.impulse_controllable = impulse_controllable(sys, tol);
  rep.strongly_stabilizable = rep.impulse_controllable && hautus(sys, pi, tol, rhp);
  rep.strongly_anti_stabilizable = rep.impulse_controllable && hautus(sys, pi, tol, lhp);
  rep.strongly_controllable = rep.strongly_stabilizable && rep.strongly_anti_stabilizable;
  rep.impulse_observable = impulse_controllable(d, tol);
  // The dual pencil has the same finite eigenvalues.
  rep.strongly_detectable = rep.impulse_observable && hautus(d, pi, tol, rhp);
  return rep;
}

Matrix kyp_block(const DescriptorSystem& sys, const Matrix& X) {
  const Eigen::Index n = sys.n(), m = sys.m();
  Matrix W(n + m, n + m);
  W << -sys.A.transpose() * X - X.transpose() * sys.A, sys.C.transpose() - X.transpose() * sys.B,
      sys.C - sys.B.transpose() * X, Matrix::Zero(m, m);
  return W;
}

// ---------------------------------------------------------------------------
// System file format

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void write_matrix(std::ostream& os, const char* name, const Matrix& M) {
  os << "matrix " << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? " " : "") << format_double(M(i, j));
    os << '\n';
  }
}

void write_header(std::ostream& os, const char* kind, Eigen::Index n, Eigen::Index m, Eigen::Index p) {
  os << "phlqg-system 1\nkind " << kind << "\ndims " << n << ' ' << m << ' ' << p << '\n';
}

std::string next_token(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) fail(ErrorCode::ParseError, "unexpected end of system file");
  return tok;
}

long next_count(std::istream& is) {
  const std::string tok = next_token(is);
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0)
    fail(ErrorCode::ParseError, "bad count '" + tok + "'");
  return v;
}

double next_double(std::istream& is) {
  const std::string tok = next_token(is);
  double v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail(ErrorCode::ParseError, "bad number '" + tok + "'");
  if (!std::isfinite(v)) fail(ErrorCode::ParseError, "non-finite entry");
  return v;
}

}  // namespace

void write_system(std::ostream& os, const DescriptorSystem& sys) {
  write_header(os, "descriptor", sys.n(), sys.m(), sys.p());
  write_matrix(os, "E", sys.E);
  write_matrix(os, "A", sys.A);
  write_matrix(os, "B", sys.B);
  write_matrix(os, "C", sys.C);
  os << "end\n";
}

void write_system(std::ostream& os, const PortHamiltonianDAE& ph) {
  write_header(os, "ph", ph.n(), ph.m(), ph.C.rows());
  write_matrix(os, "E", ph.E);
  write_matrix(os, "J", ph.J);
  write_matrix(os, "R", ph.R);
  write_matrix(os, "Q", ph.Q);
  write_matrix(os, "B", ph.B);
  write_matrix(os, "A", ph.A);
  write_matrix(os, "C", ph.C);
  os << "end\n";
}

AnySystem read_system(std::istream& is) {
  if (next_token(is) != "phlqg-system") fail(ErrorCode::ParseError, "missing magic line");
  if (next_count(is) != 1) fail(ErrorCode::ParseError, "unsupported format version");
  if (next_token(is) != "kind") fail(ErrorCode::ParseError, "expected 'kind'");
  const std::string kind = next_token(is);
  if (kind != "ph" && kind != "descriptor") fail(ErrorCode::ParseError, "unknown kind '" + kind + "'");
  if (next_token(is) != "dims") fail(ErrorCode::ParseError, "expected 'dims'");
  const long n = next_count(is), m = next_count(is), p = next_count(is);

  std::map<std::string, Matrix> mats;
  for (;;) {
    const std::string tok = next_token(is);
    if (tok == "end") break;
    if (tok != "matrix") fail(ErrorCode::ParseError, "expected 'matrix' or 'end', got '" + tok + "'");
    const std::string name = next_token(is);
    const long rows = next_count(is), cols = next_count(is);
    Matrix M(rows, cols);
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j) M(i, j) = next_double(is);
    mats[name] = std::move(M);
  }
  auto get = [&](const char* name, long rows, long cols) {
    auto it = mats.find(name);
    if (it == mats.end()) fail(ErrorCode::ParseError, std::string("missing matrix ") + name);
    if (it->second.rows() != rows || it->second.cols() != cols)
      fail(ErrorCode::ParseError, std::string("matrix ") + name + " has wrong dimensions");
    return it->second;
  };
  if (kind == "descriptor") return DescriptorSystem{get("E", n, n), get("A", n, n), get("B", n, m), get("C", p, n)};
  PortHamiltonianDAE ph{get("E", n, n), get("J", n, n), get("R", n, n), get("Q", n, n), get("B", n, m), {}, {}, 0};
  validate(ph);
  ph.A = mats.count("A") ? get("A", n, n) : Matrix((ph.J - ph.R) * ph.Q);
  ph.C = mats.count("C") ? get("C", m, n) : Matrix(ph.B.transpose() * ph.Q);
  ph.rank_E = numerical_rank(ph.E, kRankTol);
  return ph;
}

void save_system(const std::string& path, const AnySystem& sys) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  std::visit([&](const auto& s) { write_system(os, s); }, sys);
  if (!os) fail(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

AnySystem load_system(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return read_system(is);
}

}  // namespace phlqg

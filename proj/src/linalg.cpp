#include "phlqg/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>

extern "C" {
void dlanv2_(double* a, double* b, double* c, double* d, double* rt1r, double* rt1i, double* rt2r,
             double* rt2i, double* cs, double* sn);
void dtrsen_(const char* job, const char* compq, const int* select, const int* n, double* t,
             const int* ldt, double* q, const int* ldq, double* wr, double* wi, int* m, double* s,
             double* sep, double* work, const int* lwork, int* iwork, const int* liwork, int* info,
             std::size_t job_len, std::size_t compq_len);
}

namespace phlqg {

namespace {

Eigen::BDCSVD<Matrix> thin_svd(const Matrix& M) {
  return Eigen::BDCSVD<Matrix>(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

// Eigenvalue of the leading position of a standardized 1x1 or 2x2 block.
Complex block_eigenvalue(const Matrix& T, Eigen::Index k, bool pair) {
  if (!pair) return {T(k, k), 0.0};
  const double b = T(k, k + 1), c = T(k + 1, k);
  return {T(k, k), std::sqrt(std::abs(b)) * std::sqrt(std::abs(c))};
}

}  // namespace

double norm2(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double condition_number(const Matrix& M) {
  if (M.size() == 0) return 1.0;
  Eigen::BDCSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

Matrix pinv(const Matrix& M, double tol) {
  if (M.size() == 0) return Matrix::Zero(M.cols(), M.rows());
  auto svd = thin_svd(M);
  const auto& s = svd.singularValues();
  const double cut = tol * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut && s(i) > 0) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Matrix& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

Matrix null_space(const Matrix& M, double tol) {
  const Eigen::Index n = M.cols();
  if (M.rows() == 0) return Matrix::Identity(n, n);
  if (n == 0) return Matrix(0, 0);
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * s(0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

Matrix range_space(const Matrix& M, double tol) {
  const Eigen::Index m = M.rows();
  if (M.cols() == 0 || m == 0) return Matrix(m, 0);
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s(0) > 0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix sym(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double lambda_min_sym(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max_sym(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

std::vector<Complex> eigenvalues(const Matrix& M) {
  std::vector<Complex> out;
  if (M.size() == 0) return out;
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::SchurFailure, "eigenvalue iteration failed");
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

Matrix psd_factor(const Matrix& M, double tol) {
  if (M.rows() != M.cols()) fail(ErrorCode::InvalidArgument, "psd_factor needs a square matrix");
  const Eigen::Index n = M.rows();
  if (n == 0) return Matrix(0, 0);
  const double scale = M.norm();
  if ((M - M.transpose()).norm() > tol * scale) fail(ErrorCode::NotSymmetric, "psd_factor input");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(M));
  const Vector& lam = es.eigenvalues();
  const double cut = tol * scale;
  if (lam(0) < -cut) fail(ErrorCode::NotPSD, "lambda_min = " + std::to_string(lam(0)));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i)
    if (lam(i) > cut) keep.push_back(i);
  Matrix L(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    L.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(lam(keep[j]));
  return L;
}

SchurForm real_schur(const Matrix& M) {
  const Eigen::Index n = M.rows();
  SchurForm out;
  if (n == 0) {
    out.T = Matrix(0, 0);
    out.U = Matrix(0, 0);
    return out;
  }
  Eigen::RealSchur<Matrix> rs(n);
  rs.setMaxIterations(100 * n);
  rs.compute(M);
  if (rs.info() != Eigen::Success) fail(ErrorCode::SchurFailure, "QR iteration did not converge");
  Matrix T = rs.matrixT();
  Matrix U = rs.matrixU();
  for (Eigen::Index i = 2; i < n; ++i) T.block(i, 0, 1, i - 1).setZero();

  // Bring 2x2 blocks to LAPACK standard form so dtrsen/dtrsyl accept them.
  Eigen::Index k = 0;
  while (k < n - 1) {
    if (T(k + 1, k) == 0.0) {
      ++k;
      continue;
    }
    double a = T(k, k), b = T(k, k + 1), c = T(k + 1, k), d = T(k + 1, k + 1);
    double rt1r, rt1i, rt2r, rt2i, cs, sn;
    dlanv2_(&a, &b, &c, &d, &rt1r, &rt1i, &rt2r, &rt2i, &cs, &sn);
    Eigen::Matrix2d R;
    R << cs, -sn, sn, cs;
    if (k + 2 < n) T.block(k, k + 2, 2, n - k - 2) = R.transpose() * T.block(k, k + 2, 2, n - k - 2);
    if (k > 0) T.block(0, k, k, 2) = T.block(0, k, k, 2) * R;
    T(k, k) = a;
    T(k, k + 1) = b;
    T(k + 1, k) = c;
    T(k + 1, k + 1) = d;
    U.middleCols(k, 2) = U.middleCols(k, 2) * R;
    k += 2;
  }
  out.T = std::move(T);
  out.U = std::move(U);
  return out;
}

InvariantSubspace ordered_invariant_subspace(const Matrix& M,
                                             const std::function<bool(Complex)>& selector) {
  if (M.rows() != M.cols()) fail(ErrorCode::InvalidArgument, "square matrix required");
  const Eigen::Index n = M.rows();
  InvariantSubspace out;
  if (n == 0) {
    out.basis = Matrix(0, 0);
    return out;
  }
  SchurForm sf = real_schur(M);
  std::vector<int> select(static_cast<std::size_t>(n), 0);
  for (Eigen::Index k = 0; k < n;) {
    const bool pair = k + 1 < n && sf.T(k + 1, k) != 0.0;
    const bool take = selector(block_eigenvalue(sf.T, k, pair));
    select[static_cast<std::size_t>(k)] = take;
    if (pair) select[static_cast<std::size_t>(k + 1)] = take;
    k += pair ? 2 : 1;
  }
  const int ni = static_cast<int>(n);
  const int lwork = std::max(1, ni), liwork = 1;
  std::vector<double> wr(n), wi(n), work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(1);
  int m = 0, info = 0;
  double s = 0, sep = 0;
  dtrsen_("N", "V", select.data(), &ni, sf.T.data(), &ni, sf.U.data(), &ni, wr.data(), wi.data(), &m,
          &s, &sep, work.data(), &lwork, iwork.data(), &liwork, &info, 1, 1);
  if (info != 0) fail(ErrorCode::SchurFailure, "eigenvalue reordering failed, info=" + std::to_string(info));
  out.count = static_cast<int>(m);
  out.basis = sf.U.leftCols(m);
  const Matrix MB = M * out.basis;
  const double res = (MB - out.basis * (out.basis.transpose() * MB)).norm();
  if (res > 1e-9 * std::max(M.norm(), std::numeric_limits<double>::min()))
    fail(ErrorCode::SchurFailure, "invariant subspace residual " + std::to_string(res));
  return out;
}

PencilInfo pencil_spectrum(const Matrix& E, const Matrix& A, double tol) {
  if (E.rows() != E.cols() || A.rows() != A.cols() || E.rows() != A.rows())
    fail(ErrorCode::InvalidArgument, "pencil_spectrum needs square matrices of equal size");
  const Eigen::Index n = E.rows();
  PencilInfo info;
  info.rank_E = numerical_rank(E, tol);
  if (n == 0) {
    info.regular = true;
    info.impulse_free = true;
    return info;
  }

  // Regularity probes plus candidate real shifts, deterministic.
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  bool any_regular = false;
  double best_rcond = -1.0, s0 = 0.0;
  auto rcond_at = [&](Complex s) {
    CMatrix P = s * E.cast<Complex>() - A.cast<Complex>();
    Eigen::BDCSVD<CMatrix> svd(P);
    const auto& sv = svd.singularValues();
    return sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  };
  for (int i = 0; i < 8; ++i) {
    const double v = dist(gen);
    const Complex s = (i % 2 == 0) ? Complex(v, 0.0) : Complex(0.0, v);
    const double rc = rcond_at(s);
    if (rc > tol) any_regular = true;
  }
  if (!any_regular) return info;  // singular: regular stays false
  info.regular = true;
  for (int i = 0; i < 8; ++i) {
    const double v = dist(gen);
    const double rc = rcond_at(Complex(v, 0.0));
    if (rc > best_rcond) {
      best_rcond = rc;
      s0 = v;
    }
  }
  if (best_rcond <= tol) {
    // Every real candidate lands near an eigenvalue; fall back to a finer scan.
    for (int i = 0; i < 64 && best_rcond <= tol; ++i) {
      const double v = -10.0 + 20.0 * (i + 0.5) / 64.0;
      const double rc = rcond_at(Complex(v, 0.0));
      if (rc > best_rcond) {
        best_rcond = rc;
        s0 = v;
      }
    }
  }

  const Matrix F = (s0 * E - A).fullPivLu().solve(E);
  const double fnorm = norm2(F);

  // Nested chain ker F ⊂ ker F^2 ⊂ ... computed without forming powers.
  Matrix K(n, 0);
  int index = 0;
  if (fnorm > 0) {
    for (Eigen::Index step = 0; step <= n; ++step) {
      const Matrix P = F - K * (K.transpose() * F);
      Matrix K_next = null_space(P, tol * fnorm / std::max(norm2(P), fnorm * 1e-300));
      if (K_next.cols() == K.cols()) break;
      K = std::move(K_next);
      ++index;
    }
  } else {
    K = Matrix::Identity(n, n);
    index = 1;
  }
  info.index = index;
  info.impulse_free = index <= 1;
  const Eigen::Index nfinite = n - K.cols();

  std::vector<Complex> mu = eigenvalues(F);
  std::sort(mu.begin(), mu.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
  for (Eigen::Index i = 0; i < nfinite; ++i)
    info.finite_eigenvalues.push_back(s0 - 1.0 / mu[static_cast<std::size_t>(i)]);
  std::sort(info.finite_eigenvalues.begin(), info.finite_eigenvalues.end(),
            [](Complex a, Complex b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return info;
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Eigen::Index m = A.rows(), n = B.rows();
  if (C.rows() != m || C.cols() != n) fail(ErrorCode::InvalidArgument, "sylvester dimensions");
  if (m == 0 || n == 0) return Matrix::Zero(m, n);
  SchurForm sa = real_schur(A), sb = real_schur(B);
  Matrix F = sa.U.transpose() * C * sb.U;
  double scale = 1.0;
  const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'N', 'N', 1, static_cast<lapack_int>(m),
                                         static_cast<lapack_int>(n), sa.T.data(),
                                         static_cast<lapack_int>(m), sb.T.data(),
                                         static_cast<lapack_int>(n), F.data(),
                                         static_cast<lapack_int>(m), &scale);
  if (info < 0) fail(ErrorCode::InvalidArgument, "dtrsyl argument error");
  if (info == 1) fail(ErrorCode::IllConditioned, "Sylvester operator is nearly singular");
  return sa.U * (F / scale) * sb.U.transpose();
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  return sym(solve_sylvester(A.transpose(), A, -Q));
}

CMatrix transfer(const Matrix& E, const Matrix& A, const Matrix& B, const Matrix& C,
                 const Matrix& D, Complex s) {
  CMatrix G = D.cast<Complex>();
  if (E.rows() == 0) return G;
  CMatrix P = s * E.cast<Complex>() - A.cast<Complex>();
  G += C.cast<Complex>() * P.partialPivLu().solve(B.cast<Complex>());
  return G;
}

Matrix block_diag(const Matrix& X, const Matrix& Y) {
  Matrix out = Matrix::Zero(X.rows() + Y.rows(), X.cols() + Y.cols());
  out.topLeftCorner(X.rows(), X.cols()) = X;
  out.bottomRightCorner(Y.rows(), Y.cols()) = Y;
  return out;
}

}  // namespace phlqg

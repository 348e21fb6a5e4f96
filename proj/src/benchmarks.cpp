#include "phlqg/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phlqg/hamiltonian_opt.hpp"
#include "phlqg/kyp.hpp"

namespace phlqg {

namespace {

Matrix lower_cholesky(const Matrix& M) {
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPSD, "matrix is not positive definite");
  return llt.matrixL();
}

// Chain stiffness-type matrix: bulk couplings between neighbours plus
// grounding at both ends.
Matrix chain_matrix(int n, double bulk, double boundary) {
  Matrix K = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    K(i, i) += bulk;
    K(i + 1, i + 1) += bulk;
    K(i, i + 1) -= bulk;
    K(i + 1, i) -= bulk;
  }
  K(0, 0) += boundary;
  K(n - 1, n - 1) += boundary;
  return K;
}

// Galerkin projection x1 = V z on the differential part of a semi-explicit system.
DescriptorSystem restrict_differential(const DescriptorSystem& s, int r, const Matrix& V) {
  const Eigen::Index n = s.n(), k = n - r, q = V.cols();
  Matrix T = Matrix::Zero(n, q + k);
  T.topLeftCorner(r, q) = V;
  T.bottomRightCorner(k, k).setIdentity();
  DescriptorSystem out{Matrix::Zero(q + k, q + k), T.transpose() * s.A * T, T.transpose() * s.B, s.C * T};
  out.E.topLeftCorner(q, q).setIdentity();
  return out;
}

// Controllable subspace of (A11, [A12 B1]), assembled per eigenvalue
// cluster: each cluster is decoupled from the rest of the spectrum by a
// Sylvester solve and its reachable part found by a small staircase. A global
// Krylov staircase loses the exact uncontrollable directions of the
// symmetric chains after a few steps; a plain Hautus test drops a repeated
// eigenvalue whose eigenspace is only partly reachable.
Matrix reach_basis(const Matrix& A11, const Matrix& A12, const Matrix& B1, double tol) {
  const Eigen::Index r = A11.rows();
  if (r == 0) return Matrix(0, 0);
  Matrix G(r, A12.cols() + B1.cols());
  G << A12, B1;
  const double scale = std::max({norm2(A11), norm2(G), std::numeric_limits<double>::min()});
  const double cluster_tol = 1e-8 * std::max(norm2(A11), 1.0);
  auto near = [&](Complex a, Complex b) {
    return std::abs(a - b) <= cluster_tol || std::abs(a - std::conj(b)) <= cluster_tol;
  };

  const std::vector<Complex> eig = eigenvalues(A11);
  std::vector<bool> used(eig.size(), false);
  Matrix acc(r, 0);
  for (std::size_t i = 0; i < eig.size(); ++i) {
    if (used[i]) continue;
    std::vector<Complex> members{eig[i]};
    used[i] = true;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t j = 0; j < eig.size(); ++j) {
        if (used[j]) continue;
        if (std::any_of(members.begin(), members.end(), [&](Complex m) { return near(eig[j], m); })) {
          used[j] = true;
          members.push_back(eig[j]);
          grew = true;
        }
      }
    }
    auto in_cluster = [&](Complex l) {
      return std::any_of(members.begin(), members.end(), [&](Complex m) { return near(l, m); });
    };
    const InvariantSubspace sub = ordered_invariant_subspace(A11, in_cluster);
    if (sub.count == 0) continue;
    const Matrix U1 = sub.basis.leftCols(sub.count);
    const Matrix T11 = U1.transpose() * A11 * U1;
    Matrix G1 = U1.transpose() * G;
    if (sub.count < r) {
      const Matrix U2 = null_space(U1.transpose());
      const Matrix Y = solve_sylvester(T11, -(U2.transpose() * A11 * U2), -(U1.transpose() * A11 * U2));
      G1 -= Y * (U2.transpose() * G);
    }
    // rank decisions relative to the global scale, not the cluster's
    const double local = std::max({norm2(T11), norm2(G1), std::numeric_limits<double>::min()});
    const Matrix K = controllable_subspace(T11, G1, tol * scale / local);
    if (K.cols() == 0) continue;
    Matrix next(r, acc.cols() + K.cols());
    next << acc, U1 * K;
    acc = std::move(next);
  }
  return acc.cols() == 0 ? Matrix(r, 0) : range_space(acc);
}

}  // namespace

Counterexample counterexample(const std::string& id) {
  Counterexample out;
  out.id = id;
  Matrix E = Matrix::Zero(3, 3);
  E(0, 0) = E(1, 1) = 1.0;
  if (id == "phdae_mor") {
    const double a = std::sqrt(1.0 + std::sqrt(2.0)), b = std::sqrt(2.0 + std::sqrt(5.0));
    const double a2 = a * a, b2 = b * b;
    Matrix J(3, 3), R(3, 3), Q(3, 3), B = Matrix::Zero(3, 2);
    J << 0, (a2 + b2) / (b2 - a2), 0, (a2 + b2) / (a2 - b2), 0, 1, 0, -1, 0;
    R << 1, 1, 0, 1, 2, 0, 0, 0, 0;
    Q << a, 0, 0, 0, b, 0, 0, b - 1 / b, 1;
    B(0, 0) = B(2, 1) = 1.0;
    out.ph = assemble(E, J, R, Q, B);
    out.sys = out.ph.descriptor();
    out.is_ph = true;
    out.P_c = Eigen::Vector3d(1 / a, 1 / b, 1).asDiagonal();
    out.P_f = Matrix::Zero(3, 3);
    out.P_f << 1 / a, 0, 0, 0, 1 / b, 1 / b2 - 1, 0, 0, 1;
  } else if (id == "classical") {
    Matrix A(3, 3), B(3, 3);
    A << -1, 0, 0, 0, -1, 1, 0, 1, 0;
    B << 1, 0, 0, 0, std::sqrt(3.0) / 2, 0, 0, -4 / std::sqrt(3.0), 1;
    out.sys = {E, A, B, B.transpose()};
    out.P_c = Eigen::Vector3d(std::sqrt(2.0) - 1, 1.0 / 3.0, 1).asDiagonal();
    out.P_f = out.P_c;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown counterexample '" + id + "'");
  }
  return out;
}

MsdModels msd_chain(const MsdConfig& cfg) {
  const int k = cfg.masses;
  if (k < 2 || !(cfg.mass > 0)) fail(ErrorCode::InvalidArgument, "msd_chain needs at least two masses and c > 0");
  const int n = 2 * k + 1;
  const Matrix K = chain_matrix(k, cfg.spring_bulk, cfg.spring_boundary);
  const Matrix D = chain_matrix(k, cfg.damping_bulk, cfg.damping_boundary);
  Matrix Nr = Matrix::Zero(1, k);
  Nr(0, 0) = 1.0;
  Nr(0, k - 1) = -1.0;
  const double c = cfg.mass;

  MsdModels out;
  {
    Matrix E = Matrix::Zero(n, n), J = Matrix::Zero(n, n), R = Matrix::Zero(n, n), B = Matrix::Zero(n, 1);
    E.topLeftCorner(k, k) = K;
    E.block(k, k, k, k) = c * Matrix::Identity(k, k);
    J.block(0, k, k, k) = K;
    J.block(k, 0, k, k) = -K;
    J.block(k, 2 * k, k, 1) = Nr.transpose();
    J.block(2 * k, k, 1, k) = -Nr;
    R.block(k, k, k, k) = D;
    B(n - 1, 0) = 1.0;
    out.first_order = assemble(E, J, R, Matrix::Identity(n, n), B);
  }
  {
    // x~1 = L^T x1, x~2 = sqrt(c) x2 with S = T^-T, so Q stays the identity.
    // N enters with the opposite sign to the first-order form; flipping both
    // the constraint and the multiplier leaves the transfer function unchanged.
    const Matrix L = lower_cholesky(K);
    const double sc = std::sqrt(c);
    Matrix E = Matrix::Identity(n, n), J = Matrix::Zero(n, n), R = Matrix::Zero(n, n), B = Matrix::Zero(n, 1);
    E(n - 1, n - 1) = 0.0;
    J.block(0, k, k, k) = L.transpose() / sc;
    J.block(k, 0, k, k) = -L / sc;
    J.block(k, 2 * k, k, 1) = -Nr.transpose() / sc;
    J.block(2 * k, k, 1, k) = Nr / sc;
    R.block(k, k, k, k) = D / c;
    B(n - 1, 0) = 1.0;
    out.semi_explicit = assemble(E, J, R, Matrix::Identity(n, n), B);
  }
  {
    const DecoupledWcf w = to_decoupled_wcf(out.semi_explicit, true);
    const Eigen::Index r = w.r, a = n - r;
    Matrix E = Matrix::Zero(n, n), Q = Matrix::Zero(n, n), B(n, 1);
    E.topLeftCorner(r, r).setIdentity();
    Q.topLeftCorner(r, r) = w.Q11;
    Q.bottomLeftCorner(a, r) = w.Q21;
    Q.bottomRightCorner(a, a) = w.Q22;
    B << w.B1, w.B2;
    out.decoupled = assemble(E, w.J, w.R, Q, B);
  }
  return out;
}

NetworkModels transport_network(const NetworkConfig& cfg) {
  const int nn = cfg.nodes, kin = cfg.inner_nodes;
  const int np = static_cast<int>(cfg.pipes.size());
  if (nn < 2 || np < 1 || kin < 1 || !(cfg.d0 > 0) || !(cfg.density > 0))
    fail(ErrorCode::InvalidArgument, "invalid network configuration");
  const std::set<int> bset(cfg.boundary.begin(), cfg.boundary.end());
  std::vector<int> junction_index(static_cast<std::size_t>(nn), -1), boundary_index(static_cast<std::size_t>(nn), -1);
  int nj = 0, nb = 0;
  for (int v = 0; v < nn; ++v) {
    if (bset.count(v)) boundary_index[static_cast<std::size_t>(v)] = nb++;
    else junction_index[static_cast<std::size_t>(v)] = nj++;
  }
  for (const auto& [s, t] : cfg.pipes)
    if (s < 0 || t < 0 || s >= nn || t >= nn || s == t) fail(ErrorCode::InvalidArgument, "pipe endpoint out of range");
  if (nb == 0) fail(ErrorCode::InvalidArgument, "network needs at least one boundary node");

  const int n1 = np * kin, n2 = np * (kin + 1);
  const double h = 1.0 / (kin + 1);
  Matrix G = Matrix::Zero(n1, n2), N = Matrix::Zero(nj, n2), B2 = Matrix::Zero(n2, nb);
  for (int e = 0; e < np; ++e) {
    const int p0 = e * kin, q0 = e * (kin + 1);
    // Segment j of a pipe joins node j-1 and node j (0 and kin+1 are the ends).
    for (int i = 0; i < kin; ++i) {
      G(p0 + i, q0 + i) = -1.0;
      G(p0 + i, q0 + i + 1) = 1.0;
    }
    const auto [s, t] = cfg.pipes[static_cast<std::size_t>(e)];
    const int first = q0, last = q0 + kin;
    if (junction_index[static_cast<std::size_t>(s)] >= 0) N(junction_index[static_cast<std::size_t>(s)], first) += 1.0;
    else B2(first, boundary_index[static_cast<std::size_t>(s)]) += 1.0;
    if (junction_index[static_cast<std::size_t>(t)] >= 0) N(junction_index[static_cast<std::size_t>(t)], last) -= 1.0;
    else B2(last, boundary_index[static_cast<std::size_t>(t)]) -= 1.0;
  }
  if (nj > 0 && numerical_rank(N) < nj) fail(ErrorCode::RankDeficientN, "junction constraints are rank deficient");

  const Matrix M1 = h * cfg.density * Matrix::Identity(n1, n1);
  const Matrix M2 = h * Matrix::Identity(n2, n2);
  const Matrix D = cfg.d0 * h * Matrix::Identity(n2, n2);

  NetworkModels out;
  {
    const int n = n1 + n2 + nj;
    Matrix E = Matrix::Zero(n, n), J = Matrix::Zero(n, n), R = Matrix::Zero(n, n), B = Matrix::Zero(n, nb);
    E.topLeftCorner(n1, n1) = M1;
    E.block(n1, n1, n2, n2) = M2;
    J.block(0, n1, n1, n2) = -G;
    J.block(n1, 0, n2, n1) = G.transpose();
    J.block(n1, n1 + n2, n2, nj) = N.transpose();
    J.block(n1 + n2, n1, nj, n2) = -N;
    R.block(n1, n1, n2, n2) = D;
    B.block(n1, 0, n2, nb) = B2;
    out.index2 = assemble(E, J, R, Matrix::Identity(n, n), B);
  }
  out.V = nj > 0 ? null_space(N) : Matrix(Matrix::Identity(n2, n2));
  const Matrix& V = out.V;
  const Eigen::Index nv = V.cols();
  const Eigen::Index n = n1 + nv + nj;
  const Matrix M2v = V.transpose() * M2 * V, GV = G * V, Dv = V.transpose() * D * V, B2v = V.transpose() * B2;
  {
    Matrix E = Matrix::Zero(n, n), J = Matrix::Zero(n, n), R = Matrix::Zero(n, n), B = Matrix::Zero(n, nb);
    E.topLeftCorner(n1, n1) = M1;
    E.block(n1, n1, nv, nv) = M2v;
    J.block(0, n1, n1, nv) = -GV;
    J.block(n1, 0, nv, n1) = GV.transpose();
    R.block(n1, n1, nv, nv) = Dv;
    R.bottomRightCorner(nj, nj).setIdentity();
    B.block(n1, 0, nv, nb) = B2v;
    out.index1 = assemble(E, J, R, Matrix::Identity(n, n), B);
  }
  {
    // x~ = L^T x for M = L L^T, with S = T^-T so Q stays the identity.
    const Matrix L1 = lower_cholesky(M1), L2 = lower_cholesky(M2v);
    const Matrix L1i = L1.triangularView<Eigen::Lower>().solve(Matrix::Identity(n1, n1));
    const Matrix L2i = L2.triangularView<Eigen::Lower>().solve(Matrix::Identity(nv, nv));
    Matrix E = Matrix::Zero(n, n), J = Matrix::Zero(n, n), R = Matrix::Zero(n, n), B = Matrix::Zero(n, nb);
    E.topLeftCorner(n1 + nv, n1 + nv).setIdentity();
    const Matrix Jc = -L1i * GV * L2i.transpose();
    J.block(0, n1, n1, nv) = Jc;
    J.block(n1, 0, nv, n1) = -Jc.transpose();
    R.block(n1, n1, nv, nv) = sym(L2i * Dv * L2i.transpose());
    R.bottomRightCorner(nj, nj).setIdentity();
    B.block(n1, 0, nv, nb) = L2i * B2v;
    out.semi_explicit = assemble(E, J, R, Matrix::Identity(n, n), B);
  }
  return out;
}

DescriptorSystem minimal_realization(const DescriptorSystem& sys, double tol) {
  check_dimensions(sys);
  const auto se = to_semi_explicit(sys);
  DescriptorSystem s = se.sys;
  const int r = se.r;
  const Eigen::Index k = s.n() - r;
  // Algebraic variables act on the differential part like extra inputs/outputs.
  const Matrix Vc = reach_basis(s.A.topLeftCorner(r, r), s.A.topRightCorner(r, k), s.B.topRows(r), tol);
  s = restrict_differential(s, r, Vc);
  const int rc = static_cast<int>(Vc.cols());
  const Matrix Vo = reach_basis(s.A.topLeftCorner(rc, rc).transpose(), s.A.bottomLeftCorner(k, rc).transpose(),
                                s.C.leftCols(rc).transpose(), tol);
  return restrict_differential(s, rc, Vo);
}

PortHamiltonianDAE minimal_ph_realization(const PortHamiltonianDAE& ph, double tol) {
  const auto se = to_semi_explicit(ph);
  const PortHamiltonianDAE& s = se.sys;
  const int r = se.r;
  const Eigen::Index n = s.n(), k = n - r;
  const Matrix V = reach_basis(s.A.topLeftCorner(r, r), s.A.topRightCorner(r, k), s.B.topRows(r), tol);
  const Matrix Q11V = s.Q.topLeftCorner(r, r) * V;
  const double qs = std::max(Q11V.norm(), std::numeric_limits<double>::min());
  if ((Q11V - V * (V.transpose() * Q11V)).norm() > 1e-8 * qs)
    fail(ErrorCode::StructureViolation, "Q11 does not leave the reachable subspace invariant");
  const Eigen::Index q = V.cols();
  Matrix T = Matrix::Zero(n, q + k);
  T.topLeftCorner(r, q) = V;
  T.bottomRightCorner(k, k).setIdentity();
  Matrix E = Matrix::Zero(q + k, q + k);
  E.topLeftCorner(q, q).setIdentity();
  const Matrix J = T.transpose() * s.J * T;
  return assemble(E, 0.5 * (J - J.transpose()), sym(T.transpose() * s.R * T), T.transpose() * s.Q * T,
                  T.transpose() * s.B);
}

}  // namespace phlqg

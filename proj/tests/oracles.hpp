#pragma once

// Independent reference constructions shared by the unit tests. They follow
// the defining formulas directly (Kronecker products, ladder operators acting
// on occupation tuples, dense matrix exponentials) and share no code with the
// library's builders.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Eigen::MatrixXcd;

inline MatrixXcd pauli(char a) {
  MatrixXcd m = MatrixXcd::Zero(2, 2);
  switch (a) {
    case 'x':
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case 'y':
      m(0, 1) = cd(0, -1);
      m(1, 0) = cd(0, 1);
      break;
    case 'z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      m = MatrixXcd::Identity(2, 2);
  }
  return m;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Product of single-site factors; factors[j] sits on site j (leftmost first).
inline MatrixXcd chain_product(const std::vector<char>& factors) {
  MatrixXcd out = pauli(factors[0]);
  for (std::size_t j = 1; j < factors.size(); ++j) out = kron(out, pauli(factors[j]));
  return out;
}

inline MatrixXcd site_op(int L, int site, char a, double scale = 1.0) {
  std::vector<char> f(static_cast<std::size_t>(L), 'i');
  f[static_cast<std::size_t>(site)] = a;
  return scale * chain_product(f);
}

inline MatrixXcd bond_op(int L, int j, char a, double scale = 1.0) {
  std::vector<char> f(static_cast<std::size_t>(L), 'i');
  f[static_cast<std::size_t>(j)] = a;
  f[static_cast<std::size_t>((j + 1) % L)] = a;
  return scale * scale * chain_product(f);
}

/// -sum_j [S_z S_z + h_x S_x + h_z S_z], periodic; s = 1 (Pauli) or 1/2.
inline MatrixXcd ising(int L, double hx, double hz, double s = 1.0) {
  const Eigen::Index d = Eigen::Index{1} << L;
  MatrixXcd h = MatrixXcd::Zero(d, d);
  for (int j = 0; j < L; ++j) h -= bond_op(L, j, 'z', s) + hx * site_op(L, j, 'x', s) + hz * site_op(L, j, 'z', s);
  return h;
}

inline MatrixXcd xyz(int L, double jx, double jy, double jz, double hz, double s = 1.0) {
  const Eigen::Index d = Eigen::Index{1} << L;
  MatrixXcd h = MatrixXcd::Zero(d, d);
  for (int j = 0; j < L; ++j)
    h += jx * bond_op(L, j, 'x', s) + jy * bond_op(L, j, 'y', s) + jz * bond_op(L, j, 'z', s) -
         hz * site_op(L, j, 'z', s);
  return h;
}

/// Occupation tuples over modes 0..M with sum N and weighted sum M, by brute
/// force over all tuples with entries 0..N.
inline std::vector<std::vector<int>> fock_states(int N, int M) {
  std::vector<std::vector<int>> out;
  std::vector<int> occ(static_cast<std::size_t>(M) + 1, 0);
  while (true) {
    int n = 0, m = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      n += occ[k];
      m += static_cast<int>(k) * occ[k];
    }
    if (n == N && m == M) out.push_back(occ);
    std::size_t k = 0;
    while (k < occ.size() && occ[k] == N) occ[k++] = 0;
    if (k == occ.size()) break;
    ++occ[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Applies a_n^+ a_m^+ a_k a_l to an occupation tuple; returns the amplitude
/// (0 when annihilated) and updates the tuple.
inline double ladder(std::vector<int>& occ, int n, int m, int k, int l) {
  double amp = 1.0;
  auto lower = [&](int i) {
    if (occ[static_cast<std::size_t>(i)] == 0) return false;
    amp *= std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(i)]));
    --occ[static_cast<std::size_t>(i)];
    return true;
  };
  auto raise = [&](int i) {
    ++occ[static_cast<std::size_t>(i)];
    amp *= std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(i)]));
  };
  if (!lower(l) || !lower(k)) return 0.0;
  raise(m);
  raise(n);
  return amp;
}

/// 1/2 sum_{n+m=k+l} C(n,m,k,l) a_n^+ a_m^+ a_k a_l on the (N, M) block.
template <typename C>
MatrixXcd qrs(int N, int M, const C& coupling) {
  const auto states = fock_states(N, M);
  std::map<std::vector<int>, Eigen::Index> index;
  for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = static_cast<Eigen::Index>(i);
  const auto d = static_cast<Eigen::Index>(states.size());
  MatrixXcd h = MatrixXcd::Zero(d, d);
  for (Eigen::Index col = 0; col < d; ++col)
    for (int n = 0; n <= M; ++n)
      for (int m = 0; m <= M; ++m)
        for (int k = 0; k <= M; ++k)
          for (int l = 0; l <= M; ++l) {
            if (n + m != k + l) continue;
            std::vector<int> occ = states[static_cast<std::size_t>(col)];
            const double amp = ladder(occ, n, m, k, l);
            if (amp == 0.0) continue;
            h(index.at(occ), col) += 0.5 * coupling(n, m, k, l) * amp;
          }
  return h;
}

/// Row-major flattening.
inline Eigen::VectorXcd flat(const MatrixXcd& m) {
  Eigen::VectorXcd v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

/// exp(-i H t) for Hermitian H.
inline MatrixXcd propagator(const MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  Eigen::VectorXcd phase(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phase(i) = std::exp(cd(0, -es.eigenvalues()(i) * t));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

/// Long-time average of sum_j j |psi_j(t)|^2 for a tridiagonal generator
/// with diagonal a and off-diagonal b (b[0] couples 0 and 1) started at e_0:
/// sum_alpha |U_0alpha|^2 sum_j j |U_jalpha|^2, valid for a nondegenerate
/// spectrum.
inline double tridiagonal_plateau(const std::vector<double>& a, const std::vector<double>& b) {
  const auto K = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index j = 0; j < K; ++j) t(j, j) = a[static_cast<std::size_t>(j)];
  for (Eigen::Index j = 0; j + 1 < K; ++j) t(j, j + 1) = t(j + 1, j) = b[static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::MatrixXd& U = es.eigenvectors();
  double total = 0.0;
  for (Eigen::Index al = 0; al < K; ++al) {
    double pos = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) pos += static_cast<double>(j) * U(j, al) * U(j, al);
    total += U(0, al) * U(0, al) * pos;
  }
  return total;
}

}  // namespace oracle

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "multikrylov/errors.hpp"
#include "multikrylov/models.hpp"
#include "oracles.hpp"

using namespace multikrylov;
using namespace multikrylov::models;

namespace {

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spin operators follow the Kronecker convention") {
  for (int site = 0; site < 4; ++site) {
    CHECK(max_diff(spin_operator(4, site, Axis::X, SpinConvention::Pauli), oracle::site_op(4, site, 'x')) == 0.0);
    CHECK(max_diff(spin_operator(4, site, Axis::Y, SpinConvention::Pauli), oracle::site_op(4, site, 'y')) == 0.0);
    CHECK(max_diff(spin_operator(4, site, Axis::Z, SpinConvention::Half), oracle::site_op(4, site, 'z', 0.5)) == 0.0);
  }
}

TEST_CASE("Ising Hamiltonian against the Kronecker rebuild") {
  for (int L : {3, 4, 5})
    for (double hz : {0.0, 0.5}) {
      CHECK(max_diff(build_ising(L, -1.05, hz, SpinConvention::Pauli), oracle::ising(L, -1.05, hz)) < 1e-13);
      CHECK(max_diff(build_ising(L, -1.05, hz, SpinConvention::Half), oracle::ising(L, -1.05, hz, 0.5)) < 1e-13);
    }
}

TEST_CASE("XYZ Hamiltonian against the Kronecker rebuild") {
  for (int L : {3, 4, 5})
    for (double jz : {-0.1, -1.0})
      for (double hz : {0.0, 0.8})
        CHECK(max_diff(build_xyz(L, -0.35, 0.5, jz, hz, SpinConvention::Pauli), oracle::xyz(L, -0.35, 0.5, jz, hz)) <
              1e-13);
}

TEST_CASE("symmetry-related entries are bitwise equal") {
  // Translation by one site maps the Hamiltonian onto itself; the rounded
  // matrix must keep that symmetry exactly.
  const int L = 4;
  const Eigen::MatrixXcd h = build_xyz(L, -0.35, 0.5, -0.1, 0.8, SpinConvention::Pauli);
  const Eigen::Index d = h.rows();
  auto shift = [&](Eigen::Index b) { return ((b >> 1) | ((b & 1) << (L - 1))) & (d - 1); };
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) CHECK(h(shift(i), shift(j)) == h(i, j));
}

TEST_CASE("working precision Hamiltonian rounds to the standard one") {
  ModelSpec s;
  s.family = Family::XYZChain;
  s.L = 4;
  s.J_x = -0.35;
  s.J_y = 0.5;
  s.J_z = -0.1;
  s.h_z = 0.8;
  const HamiltonianTerms t = hamiltonian_terms(s);
  CHECK(max_diff(t.working(hiprec::Precision(256)).to_eigen(), t.dense()) < 1e-15);
}

TEST_CASE("Fock blocks: brute-force enumeration and partition counts") {
  // dim of the N = M block is the number of partitions of M.
  const std::vector<std::pair<int, std::size_t>> partitions{{1, 1}, {2, 2}, {3, 3}, {4, 5}, {5, 7},
                                                             {6, 11}, {7, 15}, {8, 22}, {9, 30}, {10, 42}};
  for (const auto& [n, count] : partitions) CHECK(enumerate_fock(n, n).dim() == count);
  for (int N : {2, 3, 4})
    for (int M : {0, 3, 5}) CHECK(enumerate_fock(N, M).occupations == oracle::fock_states(N, M));
  const FockBlock b = enumerate_fock(4, 5);
  for (std::size_t i = 0; i < b.dim(); ++i) CHECK(b.index_of(b.occupations[i]) == i);
  CHECK(b.index_of(std::vector<int>(6, 0)) == b.dim());
}

TEST_CASE("QRS couplings: integrable rule and symmetries") {
  const QrsCouplings ci(6, Coupling::Integrable, 0);
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 6; ++m)
      for (int k = 0; k <= 6; ++k) {
        const int l = n + m - k;
        if (l < 0 || l > 6) continue;
        CHECK(ci(n, m, k, l) == ((n == 0 || m == 0 || k == 0 || l == 0) ? 1.0 : 0.0));
      }
  const QrsCouplings cc(6, Coupling::Chaotic, 42);
  const QrsCouplings same(6, Coupling::Chaotic, 42);
  const QrsCouplings other(6, Coupling::Chaotic, 43);
  bool differs = false;
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 6; ++m)
      for (int k = 0; k <= 6; ++k) {
        const int l = n + m - k;
        if (l < 0 || l > 6) continue;
        const double c = cc(n, m, k, l);
        CHECK(c > 0.0);
        CHECK(c < 1.0);
        CHECK(c == cc(k, l, n, m));
        CHECK(c == cc(n, m, l, k));
        CHECK(c == cc(m, n, k, l));
        CHECK(c == same(n, m, k, l));
        differs = differs || c != other(n, m, k, l);
      }
  CHECK(differs);
}

TEST_CASE("QRS Hamiltonian against ladder-operator brute force") {
  for (int N : {3, 6})
    for (Coupling c : {Coupling::Integrable, Coupling::Chaotic}) {
      const int M = N;
      const QrsCouplings cp(M, c, 7);
      const Eigen::MatrixXcd expected = oracle::qrs(N, M, [&](int n, int m, int k, int l) { return cp(n, m, k, l); });
      const Eigen::MatrixXcd h = build_qrs(enumerate_fock(N, M), cp);
      CHECK(max_diff(h, expected) < 1e-12);
      CHECK(max_diff(h, h.adjoint()) == 0.0);
    }
}

TEST_CASE("number operators commute with the resonant Hamiltonian") {
  const FockBlock b = enumerate_fock(6, 6);
  const Eigen::MatrixXcd h = build_qrs(b, QrsCouplings(6, Coupling::Chaotic, 3));
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  Eigen::MatrixXcd weighted = total;
  for (int k = 0; k <= 6; ++k) {
    total += number_operator(b, k);
    weighted += static_cast<double>(k) * number_operator(b, k);
  }
  CHECK(max_diff(total, 6.0 * Eigen::MatrixXcd::Identity(h.rows(), h.cols())) == 0.0);
  CHECK(max_diff(weighted, 6.0 * Eigen::MatrixXcd::Identity(h.rows(), h.cols())) == 0.0);
}

TEST_CASE("Liouvillian action equals the commutator") {
  const Eigen::MatrixXcd h = oracle::ising(3, -1.05, 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd o(8, 8);
  for (auto& x : o.reshaped()) x = {g(rng), g(rng)};
  const hiprec::Precision p(256);
  const Liouvillian liou(h, p);
  const Eigen::VectorXcd flat = flatten_operator(o);
  const hiprec::HVector v = hiprec::HVector::from_complex({flat.data(), static_cast<std::size_t>(flat.size())}, p);
  CHECK((liou.apply(v).to_eigen() - oracle::flat(h * o - o * h)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_diff(reshape_operator(flatten_operator(o)), o) == 0.0);
  CHECK((flatten_operator(o) - oracle::flat(o)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral decomposition and frequency clustering") {
  const Eigen::MatrixXcd h = oracle::ising(4, -1.05, 0.0);
  const SpectralDecomposition sp = spectral(h);
  const auto d = static_cast<Eigen::Index>(sp.dim());
  Eigen::VectorXd e(d);
  for (Eigen::Index i = 0; i < d; ++i) e(i) = sp.energies[static_cast<std::size_t>(i)];
  CHECK(max_diff(sp.vectors * e.cast<std::complex<double>>().asDiagonal() * sp.vectors.adjoint(), h) < 1e-12);
  CHECK(std::is_sorted(sp.energies.begin(), sp.energies.end()));

  // All d zero frequencies (i == j) share a cluster.
  const std::size_t zero = sp.frequencies.find(0.0);
  REQUIRE(zero < sp.frequencies.cluster_count());
  CHECK(sp.frequencies.cluster_size(zero) >= sp.dim());
  CHECK(sp.liouvillian_norm() == doctest::Approx(sp.energies.back() - sp.energies.front()));

  const Clustering c = cluster_values({0.0, 1.0, 1.0 + 1e-12, 3.0, -2.0}, 1e-9);
  CHECK(c.cluster_count() == 4);
  CHECK(c.min_gap() == doctest::Approx(1.0));
}

TEST_CASE("invalid specs are rejected") {
  ModelSpec s;
  s.L = 2;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s.family = Family::QRS;
  s.N = 0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  CHECK_THROWS_AS(family_from_string("heisenberg"), ParameterError);
}

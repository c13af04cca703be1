#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "multikrylov/errors.hpp"
#include "multikrylov/seeds.hpp"
#include "oracles.hpp"

using namespace multikrylov;
using namespace multikrylov::seeds;

namespace {

std::size_t numerical_rank(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > 1e-10 * s(0) ? 1 : 0;
  return r;
}

Eigen::MatrixXcd columns(const SeedFamily& f) {
  Eigen::MatrixXcd m(f.vectors.front().size(), static_cast<Eigen::Index>(f.m()));
  for (std::size_t k = 0; k < f.m(); ++k) m.col(static_cast<Eigen::Index>(k)) = f.vectors[k].to_eigen();
  return m;
}

std::size_t binomial(int n, int k) {
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

const hiprec::Precision p(256);

}  // namespace

TEST_CASE("single-site spin seeds are 3L orthonormal operators in site-major order") {
  const SeedFamily f = seeds_single_site_spins(4, models::SpinConvention::Pauli, p);
  REQUIRE(f.m() == 12);
  CHECK(hiprec::orthogonality_drift(f.vectors).to_double() < 1e-70);
  // member 3 * j + a is sigma_a on site j, normalized by sqrt(d)
  const Eigen::VectorXcd expected = oracle::flat(oracle::site_op(4, 2, 'y')) / 4.0;
  CHECK((f.vectors[7].to_eigen() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("product states: 6 + 6L raw members, rank from the Gram matrix") {
  for (int L : {3, 4}) {
    const auto raw = product_states_raw(L);
    CHECK(raw.size() == static_cast<std::size_t>(6 + 6 * L));
    Eigen::MatrixXcd m(raw.front().size(), static_cast<Eigen::Index>(raw.size()));
    for (std::size_t k = 0; k < raw.size(); ++k) {
      CHECK(raw[k].norm() == doctest::Approx(1.0));
      m.col(static_cast<Eigen::Index>(k)) = raw[k];
    }
    const SeedFamily f = seeds_product_states(L, p);
    CHECK(f.m() == numerical_rank(m));
    CHECK(f.m() + f.deflated.size() == raw.size());
    CHECK(hiprec::orthogonality_drift(f.vectors).to_double() < 1e-60);
    // The orthonormal family spans the raw states.
    const Eigen::MatrixXcd q = columns(f);
    CHECK((m - q * (q.adjoint() * m)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // First two raw states are the all-up and all-down basis states.
  const auto raw = product_states_raw(3);
  CHECK(std::abs(raw[0](0) - 1.0) < 1e-15);
  CHECK(std::abs(raw[1](7) - 1.0) < 1e-15);
}

TEST_CASE("zero-body seeds are the Fock-diagonal projectors") {
  const auto block = models::enumerate_fock(6, 6);
  const SeedFamily f = seeds_zero_body(block, p);
  CHECK(f.m() == block.dim());
  for (std::size_t i = 0; i < f.m(); ++i) {
    const Eigen::VectorXcd v = f.vectors[i].to_eigen();
    const auto d = static_cast<Eigen::Index>(block.dim());
    CHECK(std::abs(v(static_cast<Eigen::Index>(i) * d + static_cast<Eigen::Index>(i)) - 1.0) < 1e-15);
    CHECK(v.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("number-operator seeds: deflation matches the rank of the raw operators") {
  for (int n : {6, 7}) {
    const auto block = models::enumerate_fock(n, n);
    Eigen::MatrixXcd raw(static_cast<Eigen::Index>(block.dim() * block.dim()), n + 1);
    for (int k = 0; k <= n; ++k) raw.col(k) = oracle::flat(models::number_operator(block, k));
    const SeedFamily f = seeds_number_operators(block, p);
    CHECK(f.m() == numerical_rank(raw));
    CHECK(f.requested == static_cast<std::size_t>(n + 1));
    CHECK(hiprec::orthogonality_drift(f.vectors).to_double() < 1e-60);
  }
}

TEST_CASE("a zero operator cannot seed a run") {
  CHECK_THROWS_AS(seeds_single_operator(Eigen::VectorXcd::Zero(16), p), ParameterError);
}

TEST_CASE("Pauli basis: level sizes C(L, w) 3^w and orthonormality") {
  const GradedBasis b = graded_pauli_basis(3);
  CHECK(b.size() == 64);
  const auto sizes = b.level_sizes();
  for (int w = 0; w <= 3; ++w)
    CHECK(sizes[static_cast<std::size_t>(w)] == binomial(3, w) * static_cast<std::size_t>(std::pow(3, w)));
  CHECK((b.members.adjoint() * b.members - Eigen::MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(pauli_weight(0, 3) == 0);
  CHECK(pauli_weight(0b110001, 3) == 2);  // digits 3, 0, 1 -> Z I X
  // String with digits (Z, I, X) is Z on site 0 and X on site 2.
  const Eigen::VectorXcd zix = oracle::flat(oracle::chain_product({'z', 'i', 'x'})) / std::sqrt(8.0);
  CHECK((b.members.col(0b110001) - zix).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(simple_set(b).size() == 9);
}

TEST_CASE("Fock transition basis grades") {
  const auto block = models::enumerate_fock(4, 4);
  const GradedBasis b = graded_fock_basis(block);
  CHECK(b.size() == block.dim() * block.dim());
  const auto simple = simple_set(b);
  CHECK(simple.size() == block.dim());
  for (std::size_t i : simple) CHECK(b.grades[i] == 0);
  // Transition ranks are even: both states carry N particles.
  for (int g : b.grades) CHECK(g % 2 == 0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "multikrylov/complexity.hpp"
#include "multikrylov/errors.hpp"
#include "multikrylov/krylov.hpp"
#include "multikrylov/models.hpp"
#include "multikrylov/seeds.hpp"
#include "oracles.hpp"

using namespace multikrylov;
using namespace multikrylov::krylov;

namespace {

struct Setup {
  models::HamiltonianTerms terms;
  models::SpectralDecomposition sp;
  models::Liouvillian liou;
  LinearMap apply;

  Setup(const models::ModelSpec& s, hiprec::Precision p)
      : terms(models::hamiltonian_terms(s)), sp(models::spectral(terms.dense())), liou(terms, p) {
    apply = [this](const hiprec::HVector& v) { return liou.apply(v); };
  }
};

models::ModelSpec ising(int L, double hz) {
  models::ModelSpec s;
  s.L = L;
  s.h_x = -1.05;
  s.h_z = hz;
  return s;
}

models::ModelSpec xyz(int L, double hz) {
  models::ModelSpec s;
  s.family = models::Family::XYZChain;
  s.L = L;
  s.J_x = -0.35;
  s.J_y = 0.5;
  s.J_z = -1.0;
  s.h_z = hz;
  return s;
}

KrylovOptions options(hiprec::Precision p, double norm_bound = 0.0) {
  KrylovOptions o;
  o.precision = p;
  o.norm_bound = norm_bound;
  return o;
}

void check_block_properties(const BlockKrylovBasis& b, const LinearMap& apply, hiprec::Precision p) {
  const double tol = p.reorth_threshold();
  CHECK(block_tridiagonality_residual(b, apply) <= tol * b.norm_estimate);   // (a)
  CHECK(hiprec::orthogonality_drift(b.vectors).to_double() <= tol);          // (b)
  const auto w = b.widths();
  for (std::size_t J = 1; J < w.size(); ++J) CHECK(w[J] <= w[J - 1]);        // (c)
  CHECK(std::accumulate(w.begin(), w.end(), std::size_t{0}) == b.size());
}

}  // namespace

TEST_CASE("policy step") {
  CHECK(reorth_policy_step(1e-3, 1e-2) == ReorthDecision::Local);
  CHECK(reorth_policy_step(1e-1, 1e-2) == ReorthDecision::Full);
}

TEST_CASE("two-level system: K = 2 and b1 = 2") {
  const hiprec::Precision p(256);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  const models::Liouvillian liou(h, p);
  const auto seed = seeds::seeds_single_operator(oracle::flat(oracle::pauli('x')), p);
  const LanczosRun r = lanczos([&](const hiprec::HVector& v) { return liou.apply(v); }, seed.vectors[0], options(p));
  CHECK(r.K == 2);
  REQUIRE(r.b.size() >= 1);
  CHECK(std::abs(r.b[0].to_double() - 2.0) < 1e-60);
  for (const auto& a : r.a) CHECK(std::abs(a.to_double()) < 1e-70);
}

TEST_CASE("single Hermitian seed: vanishing a_j and agreement with the m = 1 block run") {
  // The 129-step single-seed recursion amplifies rounding beyond what 256
  // bits can absorb, so the run needs 512 bits to terminate at D.
  const hiprec::Precision p(512);
  Setup s(ising(4, 0.5), p);
  const auto seed = seeds::seeds_single_operator(oracle::flat(oracle::site_op(4, 1, 'x')), p);
  const double bound = s.sp.liouvillian_norm();
  const LanczosRun run = lanczos(s.apply, seed.vectors[0], options(p, bound));
  CHECK(run.K == complexity::operator_invariant_dimension(s.sp, seed));
  const double tol = p.reorth_threshold();
  for (const auto& a : run.a) CHECK(std::abs(a.to_double()) <= tol * run.norm_estimate);  // (e)
  CHECK(hiprec::orthogonality_drift(run.basis).to_double() <= tol);

  const BlockKrylovBasis block = block_lanczos(s.apply, seed, options(p, bound));
  REQUIRE(block.M() == run.K);  // (h)
  for (std::size_t j = 1; j < run.K; ++j) {
    REQUIRE(block.B[j].rows == 1);
    const double bb = block.B[j].at(0, 0).abs().to_double();
    CHECK(std::abs(bb - run.b[j - 1].to_double()) <= tol * run.norm_estimate);
  }
}

TEST_CASE("block properties on chains and resonant systems") {
  const hiprec::Precision p(256);
  SUBCASE("Ising L=4 chaotic") {
    Setup s(ising(4, 0.5), p);
    check_block_properties(block_lanczos(s.apply, seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p),
                                         options(p)),
                           s.apply, p);
  }
  SUBCASE("XYZ L=4 integrable") {
    Setup s(xyz(4, 0.0), p);
    check_block_properties(block_lanczos(s.apply, seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p),
                                         options(p)),
                           s.apply, p);
  }
  SUBCASE("QRS N=M=6 zero-body") {
    models::ModelSpec m;
    m.family = models::Family::QRS;
    m.N = m.M = 6;
    m.coupling = models::Coupling::Chaotic;
    m.rng_seed = 4;
    Setup s(m, p);
    check_block_properties(block_lanczos(s.apply, seeds::seeds_zero_body(models::enumerate_fock(6, 6), p), options(p)),
                           s.apply, p);
  }
}

TEST_CASE("partial and full reorthogonalization agree") {
  const hiprec::Precision p(256);
  Setup s(xyz(4, 0.8), p);
  const auto seeds = seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p);
  KrylovOptions full = options(p);
  full.mode = ReorthMode::Full;
  const BlockKrylovBasis a = block_lanczos(s.apply, seeds, options(p));
  const BlockKrylovBasis b = block_lanczos(s.apply, seeds, full);
  REQUIRE(a.widths() == b.widths());
  for (std::size_t J = 1; J < a.M(); ++J)
    CHECK(std::abs(a.B[J].frobenius() - b.B[J].frobenius()) < 1e-30 * a.B[J].frobenius());
}

TEST_CASE("precision bump 128 -> 256 bits leaves b coefficients unchanged") {  // (i)
  const hiprec::Precision lo(128), hi(256);
  for (const models::ModelSpec& m : {ising(4, 0.0), ising(4, 0.5), xyz(4, 0.0), xyz(4, 0.8)}) {
    Setup s_lo(m, lo), s_hi(m, hi);
    const BlockKrylovBasis a =
        block_lanczos(s_lo.apply, seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, lo), options(lo));
    const BlockKrylovBasis b =
        block_lanczos(s_hi.apply, seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, hi), options(hi));
    REQUIRE(a.widths() == b.widths());
    for (std::size_t J = 1; J < a.M(); ++J) {
      const double ref = b.B[J].frobenius();
      CHECK(std::abs(a.B[J].frobenius() - ref) <= 1e-20 * ref);
    }
  }
}

TEST_CASE("conserved seed terminates after one level") {  // (d)
  const hiprec::Precision p(256);
  Setup s(ising(4, 0.5), p);
  const auto seed = seeds::seeds_single_operator(oracle::flat(s.terms.dense()), p);
  const BlockKrylovBasis b = block_lanczos(s.apply, seed, options(p, s.sp.liouvillian_norm()));
  CHECK(b.M() == 1);
  const LanczosRun r = lanczos(s.apply, seed.vectors[0], options(p, s.sp.liouvillian_norm()));
  CHECK(r.K == 1);
}

TEST_CASE("dimension limit stops an over-long run") {
  const hiprec::Precision p(256);
  Setup s(ising(4, 0.5), p);
  KrylovOptions o = options(p);
  o.dimension_limit = 50;
  const BlockKrylovBasis b =
      block_lanczos(s.apply, seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p), o);
  CHECK(b.dimension_exceeded);
  CHECK(b.size() > 50);
  CHECK(b.size() < 193);
}

TEST_CASE("contract checks") {
  const hiprec::Precision p(256);
  Setup s(ising(3, 0.5), p);
  const Eigen::VectorXcd v = oracle::flat(oracle::site_op(3, 0, 'x'));  // norm sqrt(8)
  const auto raw = hiprec::HVector::from_complex({v.data(), static_cast<std::size_t>(v.size())}, p);
  CHECK_THROWS_AS(lanczos(s.apply, raw, options(p)), ContractViolation);
  CHECK_THROWS_AS(block_lanczos(s.apply, std::vector<hiprec::HVector>{raw}, options(p)), ContractViolation);
  CHECK_THROWS_AS(block_lanczos(s.apply, std::vector<hiprec::HVector>{}, options(p)), ParameterError);
}

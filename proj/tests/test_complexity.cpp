#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "multikrylov/complexity.hpp"
#include "multikrylov/errors.hpp"
#include "oracles.hpp"

using namespace multikrylov;
using namespace multikrylov::complexity;
using cd = std::complex<double>;

namespace {

const hiprec::Precision p(256);

struct Run {
  models::HamiltonianTerms terms;
  Eigen::MatrixXcd h;
  models::SpectralDecomposition sp;
  krylov::BlockKrylovBasis basis;
};

models::ModelSpec chain(models::Family f, int L, double field) {
  models::ModelSpec s;
  s.family = f;
  s.L = L;
  if (f == models::Family::IsingMixedField) {
    s.h_x = -1.05;
    s.h_z = field;
  } else {
    s.J_x = -0.35;
    s.J_y = 0.5;
    s.J_z = -1.0;
    s.h_z = field;
  }
  return s;
}

Run operator_run(const models::ModelSpec& s, const seeds::SeedFamily& family) {
  Run r;
  r.terms = models::hamiltonian_terms(s);
  r.h = r.terms.dense();
  r.sp = models::spectral(r.h);
  const models::Liouvillian liou(r.terms, p);
  krylov::KrylovOptions o;
  o.precision = p;
  o.norm_bound = r.sp.liouvillian_norm();
  r.basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return liou.apply(v); }, family, o);
  return r;
}

Run state_run(const models::ModelSpec& s, const seeds::SeedFamily& family) {
  Run r;
  r.terms = models::hamiltonian_terms(s);
  r.h = r.terms.dense();
  r.sp = models::spectral(r.h);
  const hiprec::HMatrix hw = r.terms.working(p);
  krylov::KrylovOptions o;
  o.precision = p;
  o.norm_bound = r.sp.hamiltonian_norm();
  r.basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return hw.apply(v); }, family, o);
  return r;
}

Eigen::MatrixXcd basis_columns(const krylov::BlockKrylovBasis& b) { return basis_matrix(b.vectors); }

}  // namespace

TEST_CASE("two-level analytic case: C(t) = sin^2(2t), plateau 1/2") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  const auto sp = models::spectral(h);
  const models::Liouvillian liou(h, p);
  krylov::KrylovOptions o;
  o.precision = p;
  const auto basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return liou.apply(v); },
                                           seeds::seeds_single_operator(oracle::flat(oracle::pauli('x')), p), o);
  REQUIRE(basis.M() == 2);
  const std::vector<double> grid{0.0, 0.1, 0.7, 1.3, 2.9};
  const TimeSeries ts = c_mult_timeseries(sp, basis, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(ts.values[k] - std::pow(std::sin(2 * grid[k]), 2)) < 1e-12);
  const PlateauResult r = plateau_operator(sp, basis);
  CHECK(std::abs(r.value - 0.5) < 1e-10);
  CHECK(r.M == 2);
  CHECK(std::abs(r.normalized - 0.5) < 1e-10);
}

TEST_CASE("single seed plateau against the tridiagonal eigen-decomposition") {
  for (double hz : {0.0, 0.5}) {
    const models::ModelSpec s = chain(models::Family::IsingMixedField, 4, hz);
    const auto seed = seeds::seeds_single_operator(oracle::flat(oracle::site_op(4, 0, 'z')), p);
    const Run r = operator_run(s, seed);
    const models::Liouvillian liou(r.terms, p);
    krylov::KrylovOptions o;
    o.precision = p;
    const auto lz = krylov::lanczos([&](const hiprec::HVector& v) { return liou.apply(v); }, seed.vectors[0], o);
    std::vector<double> a, b;
    for (const auto& x : lz.a) a.push_back(x.to_double());
    for (const auto& x : lz.b) b.push_back(x.to_double());
    a.resize(lz.K);
    b.resize(lz.K > 0 ? lz.K - 1 : 0);
    const double expected = oracle::tridiagonal_plateau(a, b);
    CHECK(plateau_operator(r.sp, r.basis).value == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("phi against dense Heisenberg evolution, and unit norm") {
  const models::ModelSpec s = chain(models::Family::XYZChain, 3, 0.8);
  const Run r = operator_run(s, seeds::seeds_single_site_spins(3, models::SpinConvention::Pauli, p));
  const Eigen::MatrixXcd Q = basis_columns(r.basis);
  const std::size_t m = r.basis.widths().front();
  for (double t : {0.4, 3.1}) {
    const Eigen::MatrixXcd u = oracle::propagator(r.h, t);  // e^{-iHt}
    for (std::size_t n = 0; n < m; n += 4) {
      const Eigen::VectorXcd seed = Q.col(static_cast<Eigen::Index>(n));
      Eigen::MatrixXcd o = Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          seed.data(), r.h.rows(), r.h.cols());
      const Eigen::MatrixXcd ot = u.adjoint() * o * u;  // e^{iHt} O e^{-iHt}
      const Eigen::VectorXcd expected = Q.adjoint() * oracle::flat(ot);
      const auto phi = phi_coefficients(r.sp, r.basis, n, t);
      double total = 0.0;
      for (std::size_t k = 0; k < phi.size(); ++k) {
        CHECK(std::abs(phi[k] - expected(static_cast<Eigen::Index>(k))) < 1e-10);
        total += std::norm(phi[k]);
      }
      CHECK(std::abs(total - 1.0) <= 1e-10);  // (g)
    }
  }
}

TEST_CASE("operator plateau agrees with the brute-force time average") {
  for (auto f : {models::Family::IsingMixedField, models::Family::XYZChain})
    for (double field : {0.0, 0.8}) {
      const Run r = operator_run(chain(f, 4, field), seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p));
      const double plateau = plateau_operator(r.sp, r.basis).value;
      const double oracle = time_average_oracle(r.sp, r.basis, default_oracle_horizon(r.sp.frequencies), 4000);
      CHECK(std::abs(oracle - plateau) <= 0.01 * plateau);
    }
}

TEST_CASE("seed rotation invariance") {  // (f)
  const int L = 4;
  const auto spins = seeds::seeds_single_site_spins(L, models::SpinConvention::Pauli, p);
  const models::ModelSpec s = chain(models::Family::IsingMixedField, L, 0.5);
  const Run base = operator_run(s, spins);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(12, 12);
  for (auto& x : a.reshaped()) x = {g(rng), g(rng)};
  const Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
  // Mix at working precision so the rotated family spans exactly the same
  // space; a double-precision rotation would leak outside it.
  seeds::SeedFamily rotated;
  rotated.kind = seeds::SeedKind::SingleSiteSpins;
  for (Eigen::Index k = 0; k < 12; ++k) {
    hiprec::HVector v(spins.vectors[0].size(), p);
    for (Eigen::Index j = 0; j < 12; ++j) {
      const hiprec::HComplex c(hiprec::HReal(u(j, k).real(), p.bits()), hiprec::HReal(u(j, k).imag(), p.bits()));
      hiprec::axpy(c, spins.vectors[static_cast<std::size_t>(j)], v);
    }
    v = hiprec::orthogonalize_against(std::move(v), rotated.vectors).vector;
    hiprec::normalize(v);
    rotated.vectors.push_back(std::move(v));
  }
  rotated.requested = 12;
  const Run rot = operator_run(s, rotated);

  const double v0 = plateau_operator(base.sp, base.basis).value;
  const double v1 = plateau_operator(rot.sp, rot.basis).value;
  CHECK(std::abs(v0 - v1) <= 1e-8 * v0);
  CHECK(base.basis.M() == rot.basis.M());
}

TEST_CASE("Krylov size equals the invariant dimension") {
  for (auto f : {models::Family::IsingMixedField, models::Family::XYZChain})
    for (double field : {0.0, 0.8}) {
      const auto spins = seeds::seeds_single_site_spins(4, models::SpinConvention::Pauli, p);
      const Run r = operator_run(chain(f, 4, field), spins);
      CHECK(r.basis.size() == operator_invariant_dimension(r.sp, spins));
    }
  models::ModelSpec q;
  q.family = models::Family::QRS;
  q.N = q.M = 6;
  q.coupling = models::Coupling::Chaotic;
  q.rng_seed = 9;
  const auto block = models::enumerate_fock(6, 6);
  for (const auto& fam : {seeds::seeds_zero_body(block, p), seeds::seeds_number_operators(block, p)}) {
    const Run r = operator_run(q, fam);
    CHECK(r.basis.size() == operator_invariant_dimension(r.sp, fam));
  }
}

TEST_CASE("cluster contraction against the defining double sum") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  const std::vector<double> freq{0.0, 1.0, 0.0, 2.0, 1.0, 1.0, 3.0};
  const auto clusters = models::cluster_values(freq, 1e-12);
  Eigen::MatrixXcd S(7, 2), X(7, 4);
  for (auto& x : S.reshaped()) x = {g(rng), g(rng)};
  for (auto& x : X.reshaped()) x = {g(rng), g(rng)};
  const std::vector<int> grades{0, 1, 2, 5};
  const auto got = cluster_contraction(S, X, grades, clusters);
  for (Eigen::Index n = 0; n < 2; ++n) {
    double expected = 0.0;
    for (Eigen::Index k = 0; k < 4; ++k)
      for (Eigen::Index a = 0; a < 7; ++a)
        for (Eigen::Index b = 0; b < 7; ++b)
          if (freq[static_cast<std::size_t>(a)] == freq[static_cast<std::size_t>(b)])
            expected += grades[static_cast<std::size_t>(k)] *
                        (std::conj(X(a, k)) * S(a, n) * X(b, k) * std::conj(S(b, n))).real();
    CHECK(got[static_cast<std::size_t>(n)] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("state plateau agrees with its time average and with dense evolution") {
  const int L = 4;
  const models::ModelSpec s = chain(models::Family::XYZChain, L, 0.8);
  const auto fam = seeds::seeds_product_states(L, p);
  const Run r = state_run(s, fam);
  const auto ec = models::energy_clusters(r.sp);
  const PlateauResult pr = plateau_state(r.sp, ec, r.basis);
  const double oracle = state_time_average_oracle(r.sp, r.basis, default_oracle_horizon(ec), 4000);
  CHECK(std::abs(oracle - pr.value) <= 0.01 * pr.value);
  CHECK(r.basis.size() == state_invariant_dimension(r.sp, ec, fam));

  // C(t) from e^{-iHt} psi expanded in the Krylov basis.
  const Eigen::MatrixXcd Q = basis_columns(r.basis);
  const auto grades = r.basis.grades();
  const std::size_t m = r.basis.widths().front();
  const double t = 1.7;
  const Eigen::MatrixXcd coeff = Q.adjoint() * oracle::propagator(r.h, t) * Q.leftCols(static_cast<Eigen::Index>(m));
  double expected = 0.0;
  for (Eigen::Index k = 0; k < coeff.rows(); ++k)
    expected += grades[static_cast<std::size_t>(k)] * coeff.row(k).squaredNorm();
  expected /= static_cast<double>(m);
  CHECK(c_state_timeseries(r.sp, r.basis, {t}).values[0] == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("operator size: dense evolution oracle and plateau consistency") {
  const int L = 3;
  const Eigen::MatrixXcd h = oracle::xyz(L, -0.35, 0.5, -1.0, 0.8);
  const auto sp = models::spectral(h);
  const auto graded = seeds::graded_pauli_basis(L);
  const auto simple = seeds::simple_set(graded);
  const double t = 0.9;
  const Eigen::MatrixXcd u = oracle::propagator(h, t);
  double expected = 0.0;
  for (std::size_t idx : simple) {
    const Eigen::VectorXcd v = graded.members.col(static_cast<Eigen::Index>(idx));
    Eigen::MatrixXcd o = Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), h.rows(), h.cols());
    const Eigen::VectorXcd c = graded.members.adjoint() * oracle::flat(u.adjoint() * o * u);
    for (Eigen::Index k = 0; k < c.size(); ++k) expected += graded.grades[static_cast<std::size_t>(k)] * std::norm(c(k));
  }
  expected /= static_cast<double>(simple.size());
  CHECK(size_timeseries(sp, graded, simple, {t}).values[0] == doctest::Approx(expected).epsilon(1e-10));

  const PlateauResult r = plateau_size(sp, graded, simple);
  CHECK(r.M == 4);
  const double oracle = size_time_average_oracle(sp, graded, simple, default_oracle_horizon(sp.frequencies), 4000);
  CHECK(std::abs(oracle - r.value) <= 0.01 * r.value);
}

TEST_CASE("normalization and ensemble statistics") {
  const auto [a, b] = normalize_pair(3.0, 4, 10.0, 11);
  CHECK(a == doctest::Approx(0.3));
  CHECK(b == doctest::Approx(1.0));
  CHECK(normalize_pair(0.0, 1, 0.0, 1) == std::pair<double, double>{0.0, 0.0});
  CHECK_THROWS_AS(normalize_pair(1.0, 1, 0.0, 1), ContractViolation);
  CHECK_THROWS_AS(normalize_pair(-1.0, 3, 0.0, 3), ParameterError);
  CHECK_THROWS_AS(normalize_pair(1.0, 0, 0.0, 3), ParameterError);

  const EnsembleStats st = ensemble_stats({1.0, 2.0, 4.0, 5.0});
  CHECK(st.mean == doctest::Approx(3.0));
  CHECK(st.sem == doctest::Approx(std::sqrt(10.0 / 3.0) / 2.0));
  CHECK(ensemble_stats({2.5}).sem == 0.0);
}

TEST_CASE("trapezoid average and oracle argument checks") {
  CHECK(trapezoid_average([](double t) { return std::pow(std::cos(t), 2); }, 400.0, 20000) ==
        doctest::Approx(0.5).epsilon(1e-3));
  const auto sp = models::spectral(Eigen::MatrixXcd::Identity(2, 2));
  CHECK_THROWS_AS(default_oracle_horizon(sp.frequencies), ParameterError);
}

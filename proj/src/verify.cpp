#include "multikrylov/verify.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

#include "multikrylov/cli.hpp"
#include "multikrylov/complexity.hpp"
#include "multikrylov/krylov.hpp"
#include "multikrylov/models.hpp"
#include "multikrylov/seeds.hpp"

namespace multikrylov::verify {

namespace {

Check guarded(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
  Check c{name, false, ""};
  std::ostringstream detail;
  try {
    c.passed = body(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  c.detail = detail.str();
  return c;
}

cli::RunConfig ising_config(const std::string& preset) {
  cli::RunConfig c;
  c.preset = preset;
  c.model = cli::find_preset(preset).spec;
  c.model.L = 4;
  c.seed_family = seeds::SeedKind::SingleSiteSpins;
  c.variant = cli::Variant::Operator;
  c.oracle.enabled = true;
  return c;
}

}  // namespace

std::vector<Check> run_suite() {
  std::vector<Check> out;
  const hiprec::Precision p(256);

  out.push_back(guarded("two-level analytic case", [&](std::ostringstream& d) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(2, 2);
    sx(0, 1) = sx(1, 0) = 1.0 / std::sqrt(2.0);
    const models::Liouvillian liou(h, p);
    krylov::KrylovOptions o;
    o.precision = p;
    const auto apply = [&](const hiprec::HVector& v) { return liou.apply(v); };
    const auto family = seeds::seeds_single_operator(models::flatten_operator(sx), p);
    const krylov::LanczosRun run = krylov::lanczos(apply, family.vectors.front(), o);
    const krylov::BlockKrylovBasis basis = krylov::block_lanczos(apply, family, o);
    const double plateau = complexity::plateau_operator(models::spectral(h), basis).value;
    const double b1 = run.b.empty() ? 0.0 : run.b.front().to_double();
    d << "K = " << run.K << ", b1 = " << b1 << ", plateau = " << plateau;
    return run.K == 2 && std::abs(b1 - 2.0) < 1e-12 && std::abs(plateau - 0.5) < 1e-10;
  }));

  cli::Realization integrable, chaotic;
  out.push_back(guarded("Ising L=4 ordering and oracle agreement", [&](std::ostringstream& d) {
    integrable = cli::run_single(ising_config("ising-integrable"));
    chaotic = cli::run_single(ising_config("ising-chaotic"));
    const auto [ni, nc] = complexity::normalize_pair(integrable.plateau.value, integrable.plateau.M,
                                                     chaotic.plateau.value, chaotic.plateau.M);
    const double ei = std::abs(*integrable.oracle_value - integrable.plateau.value) / integrable.plateau.value;
    const double ec = std::abs(*chaotic.oracle_value - chaotic.plateau.value) / chaotic.plateau.value;
    d << "normalized " << ni << " < " << nc << ", oracle deviations " << ei << ", " << ec;
    return ni < nc && ei <= 0.01 && ec <= 0.01;
  }));

  out.push_back(guarded("recursion properties, Ising L=4 chaotic", [&](std::ostringstream& d) {
    models::ModelSpec s = cli::find_preset("ising-chaotic").spec;
    s.L = 4;
    const models::HamiltonianTerms terms = models::hamiltonian_terms(s);
    const models::Liouvillian liou(terms, p);
    const auto apply = [&](const hiprec::HVector& v) { return liou.apply(v); };
    const auto sp = models::spectral(terms.dense());
    krylov::KrylovOptions o;
    o.precision = p;
    o.norm_bound = sp.liouvillian_norm();
    const auto basis = krylov::block_lanczos(apply, seeds::seeds_single_site_spins(4, s.convention, p), o);
    const double tol = p.reorth_threshold();
    const double resid = krylov::block_tridiagonality_residual(basis, apply);
    const double drift = hiprec::orthogonality_drift(basis.vectors).to_double();
    bool monotone = true;
    const auto w = basis.widths();
    for (std::size_t J = 1; J < w.size(); ++J) monotone = monotone && w[J] <= w[J - 1];
    const auto phi = complexity::phi_coefficients(sp, basis, 0, 1.3);
    double total = 0.0;
    for (const auto& c : phi) total += std::norm(c);
    d << "residual " << resid << ", drift " << drift << ", widths non-increasing " << monotone
      << ", sum |phi|^2 - 1 = " << total - 1.0;
    return resid <= tol * basis.norm_estimate && drift <= tol && monotone && std::abs(total - 1.0) <= 1e-10;
  }));

  out.push_back(guarded("conserved seed gives a single level", [&](std::ostringstream& d) {
    models::ModelSpec s = cli::find_preset("ising-chaotic").spec;
    s.L = 4;
    const models::HamiltonianTerms terms = models::hamiltonian_terms(s);
    const Eigen::MatrixXcd h = terms.dense();
    const models::SpectralDecomposition sp = models::spectral(h);
    const models::Liouvillian liou(terms, p);
    krylov::KrylovOptions o;
    o.precision = p;
    o.norm_bound = sp.liouvillian_norm();
    const auto basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return liou.apply(v); },
                                             seeds::seeds_single_operator(models::flatten_operator(h), p), o);
    const double plateau = complexity::plateau_operator(sp, basis).value;
    d << "M = " << basis.M() << ", plateau = " << plateau;
    return basis.M() == 1 && plateau == 0.0;
  }));

  return out;
}

}  // namespace multikrylov::verify

#include "multikrylov/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "multikrylov/errors.hpp"

namespace multikrylov::models {

using Eigen::MatrixXcd;
using cd = std::complex<double>;

// ---------------------------------------------------------------- names

std::string to_string(Family f) {
  switch (f) {
    case Family::IsingMixedField:
      return "ising";
    case Family::XYZChain:
      return "xyz";
    case Family::QRS:
      return "qrs";
  }
  return "?";
}

std::string to_string(SpinConvention c) { return c == SpinConvention::Pauli ? "pauli" : "half"; }

std::string to_string(Coupling c) { return c == Coupling::Integrable ? "integrable" : "chaotic"; }

Family family_from_string(const std::string& s) {
  if (s == "ising") return Family::IsingMixedField;
  if (s == "xyz") return Family::XYZChain;
  if (s == "qrs") return Family::QRS;
  throw ParameterError("unknown model family '" + s + "'");
}

SpinConvention convention_from_string(const std::string& s) {
  if (s == "pauli") return SpinConvention::Pauli;
  if (s == "half") return SpinConvention::Half;
  throw ParameterError("unknown spin convention '" + s + "'");
}

Coupling coupling_from_string(const std::string& s) {
  if (s == "integrable") return Coupling::Integrable;
  if (s == "chaotic") return Coupling::Chaotic;
  throw ParameterError("unknown coupling family '" + s + "'");
}

void ModelSpec::validate() const {
  if (is_chain()) {
    if (L < 3) throw ParameterError("spin chains need L >= 3 (periodic), got L = " + std::to_string(L));
    if (L > 12) throw ParameterError("L = " + std::to_string(L) + " exceeds the dense operator-space limit");
  } else {
    if (N < 1 || M < 0) {
      throw ParameterError("resonant system block needs N >= 1 and M >= 0, got (" + std::to_string(N) +
                           ", " + std::to_string(M) + ")");
    }
  }
}

// ---------------------------------------------------------------- chains

namespace {

void check_chain_length(int L) {
  if (L < 3) throw ParameterError("spin chains need L >= 3 (periodic), got L = " + std::to_string(L));
}

void add_scaled(HamiltonianTerms& h, const MatrixXcd& m, cd scale) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != cd(0.0, 0.0))
        h.terms.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), scale * m(i, j), 1});
}

}  // namespace

MatrixXcd HamiltonianTerms::dense() const {
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<std::vector<cd>> parts(dim * dim);
  for (const hiprec::MatrixTerm& t : terms) {
    if (t.row >= dim || t.col >= dim) throw DimensionError("Hamiltonian term outside the matrix");
    parts[t.row * dim + t.col].push_back(t.coeff * std::sqrt(static_cast<double>(t.radicand)));
  }
  MatrixXcd out = MatrixXcd::Zero(d, d);
  for (std::size_t e = 0; e < parts.size(); ++e) {
    auto& p = parts[e];
    std::sort(p.begin(), p.end(), [](cd a, cd b) {
      return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    cd acc = 0.0;
    for (cd v : p) acc += v;
    out(static_cast<Eigen::Index>(e / dim), static_cast<Eigen::Index>(e % dim)) = acc;
  }
  return 0.5 * (out + out.adjoint());
}

hiprec::HMatrix HamiltonianTerms::working(hiprec::Precision precision) const {
  return hiprec::HMatrix::from_terms(dim, dim, terms, precision, true);
}

MatrixXcd spin_operator(int L, int site, Axis axis, SpinConvention convention) {
  if (site < 0 || site >= L) throw ParameterError("site index out of range");
  const Eigen::Index d = Eigen::Index{1} << L;
  const Eigen::Index mask = Eigen::Index{1} << (L - 1 - site);
  const double s = convention == SpinConvention::Pauli ? 1.0 : 0.5;
  MatrixXcd out = MatrixXcd::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const bool down = (b & mask) != 0;
    switch (axis) {
      case Axis::Z:
        out(b, b) = down ? -s : s;
        break;
      case Axis::X:
        out(b ^ mask, b) = s;
        break;
      case Axis::Y:
        // sigma_y |up> = i |down>, sigma_y |down> = -i |up>
        out(b ^ mask, b) = down ? cd(0.0, -s) : cd(0.0, s);
        break;
    }
  }
  return out;
}

HamiltonianTerms ising_terms(int L, double h_x, double h_z, SpinConvention convention) {
  check_chain_length(L);
  HamiltonianTerms h;
  h.dim = std::size_t{1} << L;
  for (int j = 0; j < L; ++j) {
    const int next = (j + 1) % L;
    const MatrixXcd zj = spin_operator(L, j, Axis::Z, convention);
    add_scaled(h, zj * spin_operator(L, next, Axis::Z, convention), -1.0);
    add_scaled(h, spin_operator(L, j, Axis::X, convention), -h_x);
    add_scaled(h, zj, -h_z);
  }
  return h;
}

MatrixXcd build_ising(int L, double h_x, double h_z, SpinConvention convention) {
  return ising_terms(L, h_x, h_z, convention).dense();
}

HamiltonianTerms xyz_terms(int L, double J_x, double J_y, double J_z, double h_z, SpinConvention convention) {
  check_chain_length(L);
  HamiltonianTerms h;
  h.dim = std::size_t{1} << L;
  for (int j = 0; j < L; ++j) {
    const int next = (j + 1) % L;
    add_scaled(h, spin_operator(L, j, Axis::X, convention) * spin_operator(L, next, Axis::X, convention), J_x);
    add_scaled(h, spin_operator(L, j, Axis::Y, convention) * spin_operator(L, next, Axis::Y, convention), J_y);
    add_scaled(h, spin_operator(L, j, Axis::Z, convention) * spin_operator(L, next, Axis::Z, convention), J_z);
    add_scaled(h, spin_operator(L, j, Axis::Z, convention), -h_z);
  }
  return h;
}

MatrixXcd build_xyz(int L, double J_x, double J_y, double J_z, double h_z, SpinConvention convention) {
  return xyz_terms(L, J_x, J_y, J_z, h_z, convention).dense();
}

// ---------------------------------------------------------------- resonant systems

std::size_t FockBlock::index_of(const std::vector<int>& occ) const {
  auto it = std::lower_bound(occupations.begin(), occupations.end(), occ);
  if (it == occupations.end() || *it != occ) return dim();
  return static_cast<std::size_t>(it - occupations.begin());
}

namespace {

// Distribute `remaining_n` particles carrying `remaining_m` quanta over modes
// mode..M (mode-by-mode, descending from mode M keeps the recursion small).
void fill_modes(int mode, int remaining_n, int remaining_m, std::vector<int>& occ,
                std::vector<std::vector<int>>& out) {
  if (mode == 0) {
    if (remaining_m == 0) {
      occ[0] = remaining_n;
      out.push_back(occ);
      occ[0] = 0;
    }
    return;
  }
  for (int k = 0; k * mode <= remaining_m && k <= remaining_n; ++k) {
    occ[static_cast<std::size_t>(mode)] = k;
    fill_modes(mode - 1, remaining_n - k, remaining_m - k * mode, occ, out);
  }
  occ[static_cast<std::size_t>(mode)] = 0;
}

}  // namespace

FockBlock enumerate_fock(int N, int M) {
  if (N < 1 || M < 0) throw ParameterError("Fock block needs N >= 1 and M >= 0");
  FockBlock block;
  block.N = N;
  block.M = M;
  std::vector<int> occ(static_cast<std::size_t>(M) + 1, 0);
  fill_modes(M, N, M, occ, block.occupations);
  std::sort(block.occupations.begin(), block.occupations.end());
  return block;
}

QrsCouplings::QrsCouplings(int M, Coupling coupling, std::uint64_t rng_seed) : modes_(M + 1) {
  if (M < 0) throw ParameterError("QRS couplings need M >= 0");
  const std::size_t n4 = static_cast<std::size_t>(modes_) * modes_ * modes_ * modes_;
  c_.assign(n4, 0.0);

  if (coupling == Coupling::Integrable) {
    for (int n = 0; n < modes_; ++n)
      for (int m = 0; m < modes_; ++m)
        for (int k = 0; k < modes_; ++k)
          for (int l = 0; l < modes_; ++l)
            if (n == 0 || m == 0 || k == 0 || l == 0) c_[index(n, m, k, l)] = 1.0;
    return;
  }

  // One uniform draw per orbit of {(nm)<->(kl), k<->l, n<->m}, in
  // lexicographic order of the orbit's smallest member.
  std::mt19937_64 rng(rng_seed);
  std::vector<bool> assigned(n4, false);
  for (int n = 0; n < modes_; ++n)
    for (int m = 0; m < modes_; ++m)
      for (int k = 0; k < modes_; ++k)
        for (int l = 0; l < modes_; ++l) {
          if (n + m != k + l || assigned[index(n, m, k, l)]) continue;
          const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
          const std::array<std::array<int, 4>, 8> orbit{{{n, m, k, l},
                                                         {m, n, k, l},
                                                         {n, m, l, k},
                                                         {m, n, l, k},
                                                         {k, l, n, m},
                                                         {l, k, n, m},
                                                         {k, l, m, n},
                                                         {l, k, m, n}}};
          for (const auto& t : orbit) {
            const std::size_t i = index(t[0], t[1], t[2], t[3]);
            c_[i] = u;
            assigned[i] = true;
          }
        }
}

std::size_t QrsCouplings::index(int n, int m, int k, int l) const {
  const auto s = static_cast<std::size_t>(modes_);
  return ((static_cast<std::size_t>(n) * s + m) * s + k) * s + l;
}

double QrsCouplings::operator()(int n, int m, int k, int l) const {
  if (n < 0 || m < 0 || k < 0 || l < 0 || n >= modes_ || m >= modes_ || k >= modes_ || l >= modes_) {
    throw ParameterError("coupling index out of range");
  }
  return c_[index(n, m, k, l)];
}

HamiltonianTerms qrs_terms(const FockBlock& block, const QrsCouplings& couplings) {
  if (couplings.modes() < block.modes()) throw ParameterError("couplings do not cover the block's modes");
  HamiltonianTerms h;
  h.dim = block.dim();
  const int modes = block.modes();

  for (std::size_t col = 0; col < block.dim(); ++col) {
    const std::vector<int>& ket = block.occupations[col];
    for (int k = 0; k < modes; ++k)
      for (int l = 0; l < modes; ++l)
        for (int n = 0; n < modes; ++n) {
          const int m = k + l - n;
          if (m < 0 || m >= modes) continue;
          const double c = couplings(n, m, k, l);
          if (c == 0.0) continue;
          std::vector<int> occ = ket;
          std::uint64_t radicand = 1;
          // a_n^+ a_m^+ a_k a_l, rightmost first
          for (const int lower : {l, k}) {
            const int o = occ[static_cast<std::size_t>(lower)];
            radicand *= static_cast<std::uint64_t>(o);
            if (o == 0) break;
            occ[static_cast<std::size_t>(lower)] = o - 1;
          }
          if (radicand == 0) continue;
          for (const int raise : {m, n}) {
            const int o = occ[static_cast<std::size_t>(raise)];
            radicand *= static_cast<std::uint64_t>(o + 1);
            occ[static_cast<std::size_t>(raise)] = o + 1;
          }
          const std::size_t row = block.index_of(occ);
          if (row == block.dim()) throw ContractViolation("QRS term left the (N, M) block");
          h.terms.push_back({row, col, cd(0.5 * c, 0.0), radicand});
        }
  }
  return h;
}

MatrixXcd build_qrs(const FockBlock& block, const QrsCouplings& couplings) {
  return qrs_terms(block, couplings).dense();
}

MatrixXcd build_qrs(int N, int M, Coupling coupling, std::uint64_t rng_seed) {
  return build_qrs(enumerate_fock(N, M), QrsCouplings(M, coupling, rng_seed));
}

MatrixXcd number_operator(const FockBlock& block, int k) {
  if (k < 0 || k >= block.modes()) throw ParameterError("mode index out of range");
  const auto dim = static_cast<Eigen::Index>(block.dim());
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) out(i, i) = block.occupations[static_cast<std::size_t>(i)][k];
  return out;
}

HamiltonianTerms hamiltonian_terms(const ModelSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::IsingMixedField:
      return ising_terms(spec.L, spec.h_x, spec.h_z, spec.convention);
    case Family::XYZChain:
      return xyz_terms(spec.L, spec.J_x, spec.J_y, spec.J_z, spec.h_z, spec.convention);
    case Family::QRS:
      return qrs_terms(enumerate_fock(spec.N, spec.M), QrsCouplings(spec.M, spec.coupling, spec.rng_seed));
  }
  throw ParameterError("unknown model family");
}

MatrixXcd build_hamiltonian(const ModelSpec& spec) { return hamiltonian_terms(spec).dense(); }

std::size_t hilbert_dim(const ModelSpec& spec) {
  spec.validate();
  if (spec.is_chain()) return std::size_t{1} << spec.L;
  return enumerate_fock(spec.N, spec.M).dim();
}

// ---------------------------------------------------------------- operators

Eigen::VectorXcd flatten_operator(const MatrixXcd& op) {
  const Eigen::Index d = op.rows();
  Eigen::VectorXcd out(op.size());
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < op.cols(); ++j) out(i * op.cols() + j) = op(i, j);
  return out;
}

MatrixXcd reshape_operator(const Eigen::VectorXcd& flat) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  if (d * d != flat.size()) throw DimensionError("operator vector length is not a perfect square");
  MatrixXcd out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = flat(i * d + j);
  return out;
}

Liouvillian::Liouvillian(const MatrixXcd& hamiltonian, hiprec::Precision precision)
    : h_(hiprec::HMatrix::from_eigen(hamiltonian, precision, true)) {}

Liouvillian::Liouvillian(const HamiltonianTerms& hamiltonian, hiprec::Precision precision)
    : h_(hamiltonian.working(precision)) {}

hiprec::HVector Liouvillian::apply(const hiprec::HVector& op) const { return hiprec::commutator(h_, op); }

hiprec::HVector liouvillian_apply(const hiprec::HMatrix& h, const hiprec::HVector& op) {
  return hiprec::commutator(h, op);
}

// ---------------------------------------------------------------- spectra

Clustering cluster_values(const std::vector<double>& values, double tolerance) {
  Clustering out;
  out.tolerance = tolerance;
  out.order.resize(values.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  out.values.reserve(values.size());
  for (std::size_t i : out.order) out.values.push_back(values[i]);
  out.starts.push_back(0);
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    if (out.values[i] - out.values[i - 1] > tolerance) out.starts.push_back(i);
  }
  if (!values.empty()) out.starts.push_back(values.size());
  return out;
}

std::size_t Clustering::find(double value) const {
  for (std::size_t c = 0; c < cluster_count(); ++c) {
    const double lo = values[starts[c]];
    const double hi = values[starts[c + 1] - 1];
    if (value >= lo - tolerance && value <= hi + tolerance) return c;
  }
  return cluster_count();
}

double Clustering::min_gap() const {
  double gap = 0.0;
  for (std::size_t c = 1; c < cluster_count(); ++c) {
    const double g = values[starts[c]] - values[starts[c] - 1];
    if (g > 0.0 && (gap == 0.0 || g < gap)) gap = g;
  }
  return gap;
}

double default_cluster_tol(const std::vector<double>& energies) {
  if (energies.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  return 1e-8 * 2.0 * (*hi - *lo);
}

SpectralDecomposition spectral(const MatrixXcd& hamiltonian, double cluster_tol) {
  hiprec::EigenDecomposition eig = hiprec::symmetric_eigen(hamiltonian);
  SpectralDecomposition out;
  out.energies = std::move(eig.values);
  out.vectors = std::move(eig.vectors);
  const std::size_t d = out.energies.size();
  std::vector<double> omega(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) omega[i * d + j] = out.energies[i] - out.energies[j];
  const double tol = cluster_tol > 0.0 ? cluster_tol : default_cluster_tol(out.energies);
  out.frequencies = cluster_values(omega, tol);
  return out;
}

Clustering energy_clusters(const SpectralDecomposition& spectral, double tol) {
  if (tol <= 0.0) tol = 0.5 * default_cluster_tol(spectral.energies);
  return cluster_values(spectral.energies, tol);
}

}  // namespace multikrylov::models

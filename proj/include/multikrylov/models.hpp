#pragma once

// Hamiltonian families, their Hilbert-space bases, the Liouvillian action on
// operator space and spectral decompositions with degeneracy clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multikrylov/hiprec.hpp"

namespace multikrylov::models {

enum class Family { IsingMixedField, XYZChain, QRS };
enum class SpinConvention { Pauli, Half };
enum class Coupling { Integrable, Chaotic };
enum class Axis { X, Y, Z };

std::string to_string(Family f);
std::string to_string(SpinConvention c);
std::string to_string(Coupling c);
Family family_from_string(const std::string& s);
SpinConvention convention_from_string(const std::string& s);
Coupling coupling_from_string(const std::string& s);

/// A Hamiltonian instance. Chains use `L` and the field/coupling values,
/// resonant systems use (N, M), the coupling family and `rng_seed`.
struct ModelSpec {
  Family family = Family::IsingMixedField;
  int L = 0;
  int N = 0;
  int M = 0;
  double h_x = 0.0;
  double h_z = 0.0;
  double J_x = 0.0;
  double J_y = 0.0;
  double J_z = 0.0;
  Coupling coupling = Coupling::Integrable;
  std::uint64_t rng_seed = 0;
  SpinConvention convention = SpinConvention::Pauli;

  /// Throws ParameterError on L < 3 (chains) or N < 1, M < 0 (QRS).
  void validate() const;
  bool is_chain() const { return family != Family::QRS; }
};

// ---------------------------------------------------------------- term lists

/// A Hamiltonian as a list of elementary contributions. The working-precision
/// matrix sums them exactly; the standard-precision one adds each entry's
/// contributions in sorted order so symmetry-related entries agree bitwise.
struct HamiltonianTerms {
  std::size_t dim = 0;
  std::vector<hiprec::MatrixTerm> terms;

  Eigen::MatrixXcd dense() const;
  hiprec::HMatrix working(hiprec::Precision precision) const;
};

// ---------------------------------------------------------------- chains

/// Spin operator on `site` (0-based, site 0 is the leftmost Kronecker
/// factor) of an L-site chain; S = sigma (Pauli) or sigma / 2 (Half).
Eigen::MatrixXcd spin_operator(int L, int site, Axis axis, SpinConvention convention);

/// H = -sum_j [S_z^j S_z^{j+1} + h_x S_x^j + h_z S_z^j], periodic.
HamiltonianTerms ising_terms(int L, double h_x, double h_z, SpinConvention convention);
Eigen::MatrixXcd build_ising(int L, double h_x, double h_z, SpinConvention convention);

/// H = sum_j [J_x S_x^j S_x^{j+1} + J_y S_y^j S_y^{j+1} + J_z S_z^j S_z^{j+1} - h_z S_z^j], periodic.
HamiltonianTerms xyz_terms(int L, double J_x, double J_y, double J_z, double h_z, SpinConvention convention);
Eigen::MatrixXcd build_xyz(int L, double J_x, double J_y, double J_z, double h_z, SpinConvention convention);

// ---------------------------------------------------------------- resonant systems

/// Fock states of an (N, M) block: occupation tuples over modes 0..M with
/// sum occ = N and sum n * occ = M, sorted lexicographically.
struct FockBlock {
  int N = 0;
  int M = 0;
  std::vector<std::vector<int>> occupations;

  std::size_t dim() const { return occupations.size(); }
  int modes() const { return M + 1; }
  /// Index of an occupation tuple, or dim() if it is not in the block.
  std::size_t index_of(const std::vector<int>& occ) const;
};

FockBlock enumerate_fock(int N, int M);

/// Interaction coefficients C_{nmkl} over modes 0..M with
/// C_{nmkl} = C_{klnm} = C_{nmlk}; only n + m = k + l entries are used.
class QrsCouplings {
 public:
  QrsCouplings(int M, Coupling coupling, std::uint64_t rng_seed);

  double operator()(int n, int m, int k, int l) const;
  int modes() const { return modes_; }

 private:
  std::size_t index(int n, int m, int k, int l) const;

  int modes_;
  std::vector<double> c_;
};

/// H = 1/2 sum_{n+m=k+l} C_{nmkl} a_n^+ a_m^+ a_k a_l on the block; each
/// term is C/2 times the square root of the integer product of the
/// occupation factors.
HamiltonianTerms qrs_terms(const FockBlock& block, const QrsCouplings& couplings);
Eigen::MatrixXcd build_qrs(const FockBlock& block, const QrsCouplings& couplings);
Eigen::MatrixXcd build_qrs(int N, int M, Coupling coupling, std::uint64_t rng_seed);

/// a_k^+ a_k restricted to the block (diagonal).
Eigen::MatrixXcd number_operator(const FockBlock& block, int k);

HamiltonianTerms hamiltonian_terms(const ModelSpec& spec);
Eigen::MatrixXcd build_hamiltonian(const ModelSpec& spec);

/// Dimension of the Hilbert space the model acts on.
std::size_t hilbert_dim(const ModelSpec& spec);

// ---------------------------------------------------------------- operators

/// Row-major flattening O_ij -> index i * d + j; the trace inner product
/// becomes the Euclidean one.
Eigen::VectorXcd flatten_operator(const Eigen::MatrixXcd& op);
Eigen::MatrixXcd reshape_operator(const Eigen::VectorXcd& flat);

/// L = [H, .] on operator space at working precision.
class Liouvillian {
 public:
  Liouvillian(const Eigen::MatrixXcd& hamiltonian, hiprec::Precision precision);
  Liouvillian(const HamiltonianTerms& hamiltonian, hiprec::Precision precision);

  hiprec::HVector apply(const hiprec::HVector& op) const;
  const hiprec::HMatrix& hamiltonian() const { return h_; }
  std::size_t hilbert_dim() const { return h_.rows(); }
  std::size_t operator_dim() const { return h_.rows() * h_.rows(); }

 private:
  hiprec::HMatrix h_;
};

hiprec::HVector liouvillian_apply(const hiprec::HMatrix& h, const hiprec::HVector& op);

// ---------------------------------------------------------------- spectra

/// Values grouped by single linkage on the sorted list: consecutive values
/// closer than the tolerance share a cluster.
struct Clustering {
  std::vector<std::size_t> order;   ///< item indices sorted by value
  std::vector<double> values;       ///< sorted values
  std::vector<std::size_t> starts;  ///< cluster c spans order[starts[c] .. starts[c+1])
  double tolerance = 0.0;

  std::size_t cluster_count() const { return starts.empty() ? 0 : starts.size() - 1; }
  std::size_t cluster_size(std::size_t c) const { return starts[c + 1] - starts[c]; }
  /// Cluster containing `value`, or cluster_count() if none.
  std::size_t find(double value) const;
  /// Smallest nonzero distance between consecutive cluster representatives.
  double min_gap() const;
};

Clustering cluster_values(const std::vector<double>& values, double tolerance);

struct SpectralDecomposition {
  std::vector<double> energies;  ///< ascending
  Eigen::MatrixXcd vectors;      ///< columns are eigenvectors
  /// Liouvillian frequencies omega = E_i - E_j for pair index i * d + j.
  Clustering frequencies;

  std::size_t dim() const { return energies.size(); }
  /// Operator norms: ||L|| = E_max - E_min, ||H|| = max |E|.
  double liouvillian_norm() const { return energies.empty() ? 0.0 : energies.back() - energies.front(); }
  double hamiltonian_norm() const {
    return energies.empty() ? 0.0 : std::max(std::abs(energies.front()), std::abs(energies.back()));
  }
};

/// 1e-8 times the spectral range of L, i.e. 2 (E_max - E_min).
double default_cluster_tol(const std::vector<double>& energies);

/// `cluster_tol` <= 0 selects default_cluster_tol.
SpectralDecomposition spectral(const Eigen::MatrixXcd& hamiltonian, double cluster_tol = 0.0);

/// Energy degeneracy clusters, for state dynamics. `tol` <= 0 selects
/// 1e-8 times (E_max - E_min).
Clustering energy_clusters(const SpectralDecomposition& spectral, double tol = 0.0);

}  // namespace multikrylov::models

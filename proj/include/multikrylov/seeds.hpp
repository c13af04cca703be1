#pragma once

// Seed families for the (block) Lanczos recursion and the graded operator
// bases behind the operator-size diagnostic.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multikrylov/hiprec.hpp"
#include "multikrylov/models.hpp"

namespace multikrylov::seeds {

enum class SeedKind { SingleSiteSpins, ZeroBody, NumberOperators, ProductStates, SingleOperator };

std::string to_string(SeedKind k);
SeedKind seed_kind_from_string(const std::string& s);

/// Orthonormal seed vectors (operators flattened row-major, or states).
struct SeedFamily {
  SeedKind kind = SeedKind::SingleOperator;
  std::vector<hiprec::HVector> vectors;
  std::size_t requested = 0;
  /// Positions in the raw list that were linearly dependent on earlier ones.
  std::vector<std::size_t> deflated;

  std::size_t m() const { return vectors.size(); }
  bool acts_on_states() const { return kind == SeedKind::ProductStates; }
};

/// Gram-Schmidt (two passes) in list order; a member whose residual norm is
/// at most sqrt(eps) times its raw norm is dropped and recorded.
SeedFamily orthonormalize_family(SeedKind kind, const std::vector<Eigen::VectorXcd>& raw,
                                 hiprec::Precision precision);

/// S_a^(j) for every site, site-major then x, y, z; 3L members.
SeedFamily seeds_single_site_spins(int L, models::SpinConvention convention, hiprec::Precision precision);

/// Fock-diagonal projectors |F_i><F_i| in block order.
SeedFamily seeds_zero_body(const models::FockBlock& block, hiprec::Precision precision);

/// a_k^+ a_k for k = 0..M, orthonormalized in ascending k with deflation.
SeedFamily seeds_number_operators(const models::FockBlock& block, hiprec::Precision precision);

/// The 6 + 6L raw product states: the six uniformly aligned states in the
/// direction order +z, -z, +x, -x, +y, -y, then for each direction (same
/// order) the aligned state with one site flipped, site ascending.
std::vector<Eigen::VectorXcd> product_states_raw(int L);

SeedFamily seeds_product_states(int L, hiprec::Precision precision);

/// A single normalized operator (or state) as a one-member family.
SeedFamily seeds_single_operator(const Eigen::VectorXcd& flat, hiprec::Precision precision);

// ---------------------------------------------------------------- graded bases

enum class Grading { PauliWeight, FockTransitionRank };

/// A complete orthonormal operator basis with an integer grade per member.
/// Members are stored as columns (flattened operators) at standard precision.
struct GradedBasis {
  Grading grading = Grading::PauliWeight;
  Eigen::MatrixXcd members;
  std::vector<int> grades;

  std::size_t size() const { return grades.size(); }
  int max_grade() const;
  /// level_sizes()[J] = number of members with grade J.
  std::vector<std::size_t> level_sizes() const;
  std::vector<std::size_t> members_of_grade(int grade) const;
};

/// Number of non-identity factors of the Pauli string with base-4 digits
/// (site 0 most significant; 0 = I, 1 = X, 2 = Y, 3 = Z).
int pauli_weight(std::size_t string_index, int L);

/// All 4^L normalized Pauli strings graded by weight.
GradedBasis graded_pauli_basis(int L);

/// All dim^2 transition operators |F_i><F_j|, graded by sum_n |F_i(n) - F_j(n)|.
GradedBasis graded_fock_basis(const models::FockBlock& block);

/// Simple set averaged by the size diagnostic: grade-1 strings for chains,
/// grade-0 (Fock-diagonal) members for resonant systems.
std::vector<std::size_t> simple_set(const GradedBasis& basis);

}  // namespace multikrylov::seeds

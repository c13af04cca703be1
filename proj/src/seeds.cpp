#include "multikrylov/seeds.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "multikrylov/errors.hpp"

namespace multikrylov::seeds {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

std::string to_string(SeedKind k) {
  switch (k) {
    case SeedKind::SingleSiteSpins:
      return "single-site-spins";
    case SeedKind::ZeroBody:
      return "zero-body";
    case SeedKind::NumberOperators:
      return "number-operators";
    case SeedKind::ProductStates:
      return "product-states";
    case SeedKind::SingleOperator:
      return "single-operator";
  }
  return "?";
}

SeedKind seed_kind_from_string(const std::string& s) {
  for (SeedKind k : {SeedKind::SingleSiteSpins, SeedKind::ZeroBody, SeedKind::NumberOperators,
                     SeedKind::ProductStates, SeedKind::SingleOperator}) {
    if (to_string(k) == s) return k;
  }
  throw ParameterError("unknown seed family '" + s + "'");
}

SeedFamily orthonormalize_family(SeedKind kind, const std::vector<VectorXcd>& raw, hiprec::Precision precision) {
  SeedFamily family;
  family.kind = kind;
  family.requested = raw.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    hiprec::HVector v = hiprec::HVector::from_complex({raw[i].data(), static_cast<std::size_t>(raw[i].size())}, precision);
    const hiprec::HReal raw_norm = hiprec::norm(v);
    if (!family.vectors.empty() && !raw_norm.is_zero()) {
      v = hiprec::orthogonalize_against(std::move(v), family.vectors, 2).vector;
    }
    const hiprec::HReal residual = hiprec::norm(v);
    const hiprec::HReal tol = raw_norm * hiprec::HReal(precision.reorth_threshold(), precision.bits());
    if (raw_norm.is_zero() || residual <= tol) {
      family.deflated.push_back(i);
      continue;
    }
    hiprec::normalize(v);
    family.vectors.push_back(std::move(v));
  }
  return family;
}

SeedFamily seeds_single_site_spins(int L, models::SpinConvention convention, hiprec::Precision precision) {
  if (L < 3) throw ParameterError("single-site spin seeds need L >= 3");
  std::vector<VectorXcd> raw;
  for (int j = 0; j < L; ++j) {
    for (models::Axis a : {models::Axis::X, models::Axis::Y, models::Axis::Z}) {
      raw.push_back(models::flatten_operator(models::spin_operator(L, j, a, convention)));
    }
  }
  return orthonormalize_family(SeedKind::SingleSiteSpins, raw, precision);
}

SeedFamily seeds_zero_body(const models::FockBlock& block, hiprec::Precision precision) {
  const auto d = static_cast<Eigen::Index>(block.dim());
  std::vector<VectorXcd> raw;
  for (Eigen::Index i = 0; i < d; ++i) {
    VectorXcd v = VectorXcd::Zero(d * d);
    v(i * d + i) = 1.0;
    raw.push_back(std::move(v));
  }
  return orthonormalize_family(SeedKind::ZeroBody, raw, precision);
}

SeedFamily seeds_number_operators(const models::FockBlock& block, hiprec::Precision precision) {
  std::vector<VectorXcd> raw;
  for (int k = 0; k < block.modes(); ++k) raw.push_back(models::flatten_operator(models::number_operator(block, k)));
  return orthonormalize_family(SeedKind::NumberOperators, raw, precision);
}

std::vector<VectorXcd> product_states_raw(int L) {
  if (L < 3) throw ParameterError("product-state seeds need L >= 3");
  const double r = 1.0 / std::sqrt(2.0);
  // +z, -z, +x, -x, +y, -y ; opposite(k) = k ^ 1
  const std::array<std::array<cd, 2>, 6> single{{{cd(1, 0), cd(0, 0)},
                                                 {cd(0, 0), cd(1, 0)},
                                                 {cd(r, 0), cd(r, 0)},
                                                 {cd(r, 0), cd(-r, 0)},
                                                 {cd(r, 0), cd(0, r)},
                                                 {cd(r, 0), cd(0, -r)}}};
  const Eigen::Index d = Eigen::Index{1} << L;

  auto product = [&](int dir, int flipped_site) {
    VectorXcd v(d);
    for (Eigen::Index b = 0; b < d; ++b) {
      cd amp = 1.0;
      for (int site = 0; site < L; ++site) {
        const int bit = static_cast<int>((b >> (L - 1 - site)) & 1);
        const int k = site == flipped_site ? (dir ^ 1) : dir;
        amp *= single[static_cast<std::size_t>(k)][static_cast<std::size_t>(bit)];
      }
      v(b) = amp;
    }
    return v;
  };

  std::vector<VectorXcd> raw;
  for (int dir = 0; dir < 6; ++dir) raw.push_back(product(dir, -1));
  for (int dir = 0; dir < 6; ++dir)
    for (int site = 0; site < L; ++site) raw.push_back(product(dir, site));
  return raw;
}

SeedFamily seeds_product_states(int L, hiprec::Precision precision) {
  return orthonormalize_family(SeedKind::ProductStates, product_states_raw(L), precision);
}

SeedFamily seeds_single_operator(const VectorXcd& flat, hiprec::Precision precision) {
  SeedFamily f = orthonormalize_family(SeedKind::SingleOperator, {flat}, precision);
  if (f.m() != 1) throw ParameterError("single seed operator is zero");
  return f;
}

// ---------------------------------------------------------------- graded bases

int GradedBasis::max_grade() const { return grades.empty() ? 0 : *std::max_element(grades.begin(), grades.end()); }

std::vector<std::size_t> GradedBasis::level_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(max_grade()) + 1, 0);
  for (int g : grades) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

std::vector<std::size_t> GradedBasis::members_of_grade(int grade) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grades.size(); ++i)
    if (grades[i] == grade) out.push_back(i);
  return out;
}

int pauli_weight(std::size_t string_index, int L) {
  int w = 0;
  for (int site = 0; site < L; ++site) {
    if (string_index % 4 != 0) ++w;
    string_index /= 4;
  }
  return w;
}

GradedBasis graded_pauli_basis(int L) {
  if (L < 3) throw ParameterError("Pauli basis needs L >= 3");
  const Eigen::Index d = Eigen::Index{1} << L;
  const Eigen::Index count = d * d;
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));

  GradedBasis basis;
  basis.grading = Grading::PauliWeight;
  basis.members = MatrixXcd::Zero(count, count);
  basis.grades.resize(static_cast<std::size_t>(count));

  for (Eigen::Index s = 0; s < count; ++s) {
    basis.grades[static_cast<std::size_t>(s)] = pauli_weight(static_cast<std::size_t>(s), L);
    // digit for site j sits at base-4 position L-1-j
    for (Eigen::Index b = 0; b < d; ++b) {
      Eigen::Index out_state = b;
      cd amp = norm;
      for (int site = 0; site < L; ++site) {
        const auto digit = (s >> (2 * (L - 1 - site))) & 3;
        const Eigen::Index mask = Eigen::Index{1} << (L - 1 - site);
        const bool down = (b & mask) != 0;
        switch (digit) {
          case 1:
            out_state ^= mask;
            break;
          case 2:
            out_state ^= mask;
            amp *= down ? cd(0, -1) : cd(0, 1);
            break;
          case 3:
            if (down) amp = -amp;
            break;
          default:
            break;
        }
      }
      basis.members(out_state * d + b, s) = amp;
    }
  }
  return basis;
}

GradedBasis graded_fock_basis(const models::FockBlock& block) {
  const auto d = static_cast<Eigen::Index>(block.dim());
  GradedBasis basis;
  basis.grading = Grading::FockTransitionRank;
  basis.members = MatrixXcd::Zero(d * d, d * d);
  basis.grades.resize(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& a = block.occupations[static_cast<std::size_t>(i)];
      const auto& b = block.occupations[static_cast<std::size_t>(j)];
      int rank = 0;
      for (std::size_t n = 0; n < a.size(); ++n) rank += std::abs(a[n] - b[n]);
      basis.members(i * d + j, i * d + j) = 1.0;
      basis.grades[static_cast<std::size_t>(i * d + j)] = rank;
    }
  }
  return basis;
}

std::vector<std::size_t> simple_set(const GradedBasis& basis) {
  return basis.members_of_grade(basis.grading == Grading::PauliWeight ? 1 : 0);
}

}  // namespace multikrylov::seeds

#include "multikrylov/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "multikrylov/errors.hpp"

namespace multikrylov::complexity {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

MatrixXcd operator_overlaps(const models::SpectralDecomposition& spectral, const MatrixXcd& operators) {
  const auto d = static_cast<Eigen::Index>(spectral.dim());
  if (operators.rows() != d * d) throw DimensionError("operator overlaps: expected flattened d x d operators");
  const MatrixXcd& V = spectral.vectors;
  MatrixXcd out(d * d, operators.cols());
  Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rotated(d, d);
  for (Eigen::Index c = 0; c < operators.cols(); ++c) {
    RowMajorMap op(operators.col(c).data(), d, d);
    rotated.noalias() = V.adjoint() * op * V;
    out.col(c) = Eigen::Map<const VectorXcd>(rotated.data(), d * d);
  }
  return out;
}

MatrixXcd state_overlaps(const models::SpectralDecomposition& spectral, const MatrixXcd& states) {
  if (states.rows() != static_cast<Eigen::Index>(spectral.dim())) throw DimensionError("state overlaps: wrong length");
  return spectral.vectors.adjoint() * states;
}

MatrixXcd basis_matrix(std::span<const hiprec::HVector> vectors) {
  if (vectors.empty()) return {};
  MatrixXcd out(static_cast<Eigen::Index>(vectors.front().size()), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vectors[k].to_eigen();
  return out;
}

namespace {

// Rows permuted into cluster order so every cluster is a contiguous block.
MatrixXcd permute_rows(const MatrixXcd& m, const std::vector<std::size_t>& order) {
  MatrixXcd out(m.rows(), m.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(order[k]));
  return out;
}

std::vector<double> values_by_item(const models::Clustering& clusters) {
  std::vector<double> out(clusters.order.size());
  for (std::size_t k = 0; k < clusters.order.size(); ++k) out[clusters.order[k]] = clusters.values[k];
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_oracle_args(double T, std::size_t samples) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("oracle horizon T must be positive");
  if (samples < 1000) throw ParameterError("oracle needs at least 1000 samples");
}

double max_running_drift(const krylov::BlockKrylovBasis& basis) {
  double d = 0.0;
  for (const auto& e : basis.drift_log) d = std::max(d, e.running);
  return d;
}

void fill_diagnostics(PlateauResult& r, const krylov::BlockKrylovBasis& basis, std::size_t clusters) {
  r.diagnostics.drift = max_running_drift(basis);
  r.diagnostics.widths = basis.widths();
  r.diagnostics.cluster_count = clusters;
  r.diagnostics.full_reorthogonalizations = basis.full_reorthogonalizations;
}

void finish(PlateauResult& r) {
  r.value = mean(r.per_seed);
  r.normalized = r.M > 1 ? r.value / static_cast<double>(r.M - 1) : 0.0;
}

}  // namespace

std::vector<double> cluster_contraction(const MatrixXcd& seed_overlaps, const MatrixXcd& member_overlaps,
                                        const std::vector<int>& grades, const models::Clustering& clusters) {
  if (seed_overlaps.rows() != member_overlaps.rows() ||
      static_cast<std::size_t>(seed_overlaps.rows()) != clusters.order.size())
    throw DimensionError("cluster contraction: row count mismatch");
  if (grades.size() != static_cast<std::size_t>(member_overlaps.cols()))
    throw DimensionError("cluster contraction: one grade per member required");

  const MatrixXcd S = permute_rows(seed_overlaps, clusters.order);
  const MatrixXcd X = permute_rows(member_overlaps, clusters.order);
  Eigen::VectorXd J(static_cast<Eigen::Index>(grades.size()));
  for (std::size_t k = 0; k < grades.size(); ++k) J(static_cast<Eigen::Index>(k)) = grades[k];

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(S.cols());
  MatrixXcd G;
  for (std::size_t c = 0; c < clusters.cluster_count(); ++c) {
    const auto start = static_cast<Eigen::Index>(clusters.starts[c]);
    const auto len = static_cast<Eigen::Index>(clusters.cluster_size(c));
    G.noalias() = S.middleRows(start, len).adjoint() * X.middleRows(start, len);
    acc.noalias() += G.cwiseAbs2() * J;
  }
  return {acc.data(), acc.data() + acc.size()};
}

std::size_t invariant_dimension(const MatrixXcd& seed_overlaps, const models::Clustering& clusters, double rel_tol) {
  if (static_cast<std::size_t>(seed_overlaps.rows()) != clusters.order.size())
    throw DimensionError("invariant dimension: row count mismatch");
  const MatrixXcd S = permute_rows(seed_overlaps, clusters.order);
  std::vector<Eigen::VectorXd> singular;
  double largest = 0.0;
  for (std::size_t c = 0; c < clusters.cluster_count(); ++c) {
    const auto start = static_cast<Eigen::Index>(clusters.starts[c]);
    const auto len = static_cast<Eigen::Index>(clusters.cluster_size(c));
    Eigen::JacobiSVD<MatrixXcd> svd(S.middleRows(start, len));
    singular.push_back(svd.singularValues());
    if (singular.back().size() > 0) largest = std::max(largest, singular.back().maxCoeff());
  }
  std::size_t dim = 0;
  for (const auto& sv : singular)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > rel_tol * largest) ++dim;
  return dim;
}

std::size_t operator_invariant_dimension(const models::SpectralDecomposition& spectral,
                                         const seeds::SeedFamily& family) {
  return invariant_dimension(operator_overlaps(spectral, basis_matrix(family.vectors)), spectral.frequencies);
}

std::size_t state_invariant_dimension(const models::SpectralDecomposition& spectral,
                                      const models::Clustering& energy_clusters, const seeds::SeedFamily& family) {
  return invariant_dimension(state_overlaps(spectral, basis_matrix(family.vectors)), energy_clusters);
}

GradedDynamics::GradedDynamics(MatrixXcd seed_overlaps, const MatrixXcd& member_overlaps, std::vector<int> grades,
                               std::vector<double> frequencies, double sign)
    : seeds_(std::move(seed_overlaps)), members_adj_(member_overlaps.adjoint()) {
  if (grades.size() != static_cast<std::size_t>(members_adj_.rows()) ||
      frequencies.size() != static_cast<std::size_t>(seeds_.rows()) || seeds_.rows() != member_overlaps.rows())
    throw DimensionError("graded dynamics: inconsistent sizes");
  grades_.resize(static_cast<Eigen::Index>(grades.size()));
  for (std::size_t k = 0; k < grades.size(); ++k) grades_(static_cast<Eigen::Index>(k)) = grades[k];
  freq_ = Eigen::Map<const Eigen::VectorXd>(frequencies.data(), static_cast<Eigen::Index>(frequencies.size())) * sign;
}

VectorXcd GradedDynamics::phi(std::size_t seed, double t) const {
  const VectorXcd phase = (cd(0, t) * freq_.cast<cd>()).array().exp();
  return members_adj_ * phase.cwiseProduct(seeds_.col(static_cast<Eigen::Index>(seed)));
}

double GradedDynamics::weighted(double t) const {
  const VectorXcd phase = (cd(0, t) * freq_.cast<cd>()).array().exp();
  const MatrixXcd Y = members_adj_ * (phase.asDiagonal() * seeds_);
  return (grades_.transpose() * Y.cwiseAbs2()).sum() / static_cast<double>(seeds_.cols());
}

// ---------------------------------------------------------------- operators

namespace {

struct OperatorSetup {
  MatrixXcd members;  // eigenbasis overlaps of every basis vector
  std::vector<int> grades;
  std::size_t m = 0;
};

OperatorSetup operator_setup(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis) {
  if (basis.M() == 0) throw ParameterError("empty Krylov basis");
  OperatorSetup s;
  s.members = operator_overlaps(spectral, basis_matrix(basis.vectors));
  s.grades = basis.grades();
  s.m = basis.widths().front();
  return s;
}

OperatorSetup state_setup(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis) {
  if (basis.M() == 0) throw ParameterError("empty Krylov basis");
  OperatorSetup s;
  s.members = state_overlaps(spectral, basis_matrix(basis.vectors));
  s.grades = basis.grades();
  s.m = basis.widths().front();
  return s;
}

GradedDynamics operator_dynamics(const models::SpectralDecomposition& spectral, const OperatorSetup& s) {
  return {s.members.leftCols(static_cast<Eigen::Index>(s.m)), s.members, s.grades,
          values_by_item(spectral.frequencies), 1.0};
}

GradedDynamics state_dynamics(const models::SpectralDecomposition& spectral, const OperatorSetup& s) {
  return {s.members.leftCols(static_cast<Eigen::Index>(s.m)), s.members, s.grades, spectral.energies, -1.0};
}

TimeSeries sample(const GradedDynamics& dyn, const std::vector<double>& grid) {
  TimeSeries ts;
  ts.times = grid;
  ts.values.reserve(grid.size());
  for (double t : grid) ts.values.push_back(dyn.weighted(t));
  return ts;
}

}  // namespace

std::vector<cd> phi_coefficients(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                                 std::size_t seed, double t) {
  const OperatorSetup s = operator_setup(spectral, basis);
  if (seed >= s.m) throw ParameterError("seed index out of range");
  const VectorXcd phi = operator_dynamics(spectral, s).phi(seed, t);
  return {phi.data(), phi.data() + phi.size()};
}

TimeSeries c_mult_timeseries(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                             const std::vector<double>& grid) {
  const OperatorSetup s = operator_setup(spectral, basis);
  return sample(operator_dynamics(spectral, s), grid);
}

PlateauResult plateau_operator(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis) {
  const OperatorSetup s = operator_setup(spectral, basis);
  PlateauResult r;
  r.M = basis.M();
  r.per_seed = cluster_contraction(s.members.leftCols(static_cast<Eigen::Index>(s.m)), s.members, s.grades,
                                   spectral.frequencies);
  finish(r);
  fill_diagnostics(r, basis, spectral.frequencies.cluster_count());
  return r;
}

double default_oracle_horizon(const models::Clustering& clusters) {
  const double gap = clusters.min_gap();
  if (!(gap > 0.0)) throw ParameterError("no nonzero cluster gap; give the oracle horizon explicitly");
  return 200.0 / gap;
}

double time_average_oracle(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                           double T, std::size_t samples) {
  check_oracle_args(T, samples);
  const OperatorSetup s = operator_setup(spectral, basis);
  const GradedDynamics dyn = operator_dynamics(spectral, s);
  return trapezoid_average([&](double t) { return dyn.weighted(t); }, T, samples);
}

// ---------------------------------------------------------------- states

TimeSeries c_state_timeseries(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                              const std::vector<double>& grid) {
  const OperatorSetup s = state_setup(spectral, basis);
  return sample(state_dynamics(spectral, s), grid);
}

PlateauResult plateau_state(const models::SpectralDecomposition& spectral, const models::Clustering& energy_clusters,
                            const krylov::BlockKrylovBasis& basis) {
  const OperatorSetup s = state_setup(spectral, basis);
  PlateauResult r;
  r.M = basis.M();
  r.per_seed =
      cluster_contraction(s.members.leftCols(static_cast<Eigen::Index>(s.m)), s.members, s.grades, energy_clusters);
  finish(r);
  fill_diagnostics(r, basis, energy_clusters.cluster_count());
  return r;
}

double state_time_average_oracle(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                                 double T, std::size_t samples) {
  check_oracle_args(T, samples);
  const OperatorSetup s = state_setup(spectral, basis);
  const GradedDynamics dyn = state_dynamics(spectral, s);
  return trapezoid_average([&](double t) { return dyn.weighted(t); }, T, samples);
}

// ---------------------------------------------------------------- operator size

namespace {

GradedDynamics size_dynamics(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                             const std::vector<std::size_t>& simple, MatrixXcd& members) {
  if (simple.empty()) throw ParameterError("empty simple set");
  members = operator_overlaps(spectral, graded.members);
  MatrixXcd seeds(members.rows(), static_cast<Eigen::Index>(simple.size()));
  for (std::size_t k = 0; k < simple.size(); ++k) {
    if (simple[k] >= graded.size()) throw ParameterError("simple member index out of range");
    seeds.col(static_cast<Eigen::Index>(k)) = members.col(static_cast<Eigen::Index>(simple[k]));
  }
  return {std::move(seeds), members, graded.grades, values_by_item(spectral.frequencies), 1.0};
}

}  // namespace

TimeSeries size_timeseries(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                           const std::vector<std::size_t>& simple, const std::vector<double>& grid) {
  MatrixXcd members;
  return sample(size_dynamics(spectral, graded, simple, members), grid);
}

PlateauResult plateau_size(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                           const std::vector<std::size_t>& simple) {
  if (simple.empty()) throw ParameterError("empty simple set");
  const MatrixXcd members = operator_overlaps(spectral, graded.members);
  MatrixXcd seeds(members.rows(), static_cast<Eigen::Index>(simple.size()));
  for (std::size_t k = 0; k < simple.size(); ++k) {
    if (simple[k] >= graded.size()) throw ParameterError("simple member index out of range");
    seeds.col(static_cast<Eigen::Index>(k)) = members.col(static_cast<Eigen::Index>(simple[k]));
  }
  PlateauResult r;
  r.M = static_cast<std::size_t>(graded.max_grade()) + 1;
  r.per_seed = cluster_contraction(seeds, members, graded.grades, spectral.frequencies);
  finish(r);
  r.diagnostics.cluster_count = spectral.frequencies.cluster_count();
  return r;
}

double size_time_average_oracle(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                                const std::vector<std::size_t>& simple, double T, std::size_t samples) {
  check_oracle_args(T, samples);
  MatrixXcd members;
  const GradedDynamics dyn = size_dynamics(spectral, graded, simple, members);
  return trapezoid_average([&](double t) { return dyn.weighted(t); }, T, samples);
}

// ---------------------------------------------------------------- normalization

std::pair<double, double> normalize_pair(double value_int, std::size_t M_int, double value_cha, std::size_t M_cha) {
  if (M_int < 1 || M_cha < 1) throw ParameterError("level counts must be at least 1");
  if (value_int < 0.0 || value_cha < 0.0 || !std::isfinite(value_int) || !std::isfinite(value_cha))
    throw ParameterError("plateau values must be finite and non-negative");
  const std::size_t denom = std::max(M_int, M_cha) - 1;
  if (denom == 0) {
    if (value_int != 0.0 || value_cha != 0.0)
      throw ContractViolation("nonzero plateau with a single Krylov level");
    return {0.0, 0.0};
  }
  return {value_int / static_cast<double>(denom), value_cha / static_cast<double>(denom)};
}

EnsembleStats ensemble_stats(const std::vector<double>& values) {
  EnsembleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = mean(values);
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const auto n = static_cast<double>(values.size());
  s.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return s;
}

}  // namespace multikrylov::complexity

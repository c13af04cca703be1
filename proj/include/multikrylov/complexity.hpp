#pragma once

// Complexity time series, their all-time averages evaluated through
// degenerate-frequency cluster sums, and the brute-force time-average oracle.
// Everything here runs at standard precision on the rounded Krylov basis.

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "multikrylov/krylov.hpp"
#include "multikrylov/models.hpp"
#include "multikrylov/seeds.hpp"

namespace multikrylov::complexity {

struct PlateauResult {
  double value = 0.0;  ///< raw all-time average, mean of per_seed
  std::size_t M = 1;   ///< number of levels (grades 0..M-1)
  double normalized = 0.0;
  std::vector<double> per_seed;

  struct Diagnostics {
    double drift = 0.0;
    std::vector<std::size_t> widths;
    std::size_t cluster_count = 0;
    std::size_t full_reorthogonalizations = 0;
  } diagnostics;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// Columns are the H-eigenbasis coordinates <omega_ij|O> = (V^dagger O V)_ij,
/// flattened with pair index i * d + j.
Eigen::MatrixXcd operator_overlaps(const models::SpectralDecomposition& spectral, const Eigen::MatrixXcd& operators);
/// Columns are V^dagger psi.
Eigen::MatrixXcd state_overlaps(const models::SpectralDecomposition& spectral, const Eigen::MatrixXcd& states);

/// Basis vectors rounded to standard precision, one per column.
Eigen::MatrixXcd basis_matrix(std::span<const hiprec::HVector> vectors);

/// For every seed column s: sum_X grade_X sum_clusters |sum_{a in c} conj(s_a) x_a|^2.
std::vector<double> cluster_contraction(const Eigen::MatrixXcd& seed_overlaps, const Eigen::MatrixXcd& member_overlaps,
                                        const std::vector<int>& grades, const models::Clustering& clusters);

/// Dimension of the subspace generated by the seeds under the dynamics:
/// sum over clusters of the numerical rank of the seed overlaps restricted to
/// the cluster. Singular values below rel_tol times the largest one count as
/// zero.
std::size_t invariant_dimension(const Eigen::MatrixXcd& seed_overlaps, const models::Clustering& clusters,
                                double rel_tol = 1e-8);
std::size_t operator_invariant_dimension(const models::SpectralDecomposition& spectral,
                                         const seeds::SeedFamily& family);
std::size_t state_invariant_dimension(const models::SpectralDecomposition& spectral,
                                      const models::Clustering& energy_clusters, const seeds::SeedFamily& family);

/// Time evolution of seeds expanded in a graded member set:
/// phi_X^(n)(t) = sum_a conj(x_a) exp(i sign f_a t) s_a.
class GradedDynamics {
 public:
  GradedDynamics(Eigen::MatrixXcd seed_overlaps, const Eigen::MatrixXcd& member_overlaps, std::vector<int> grades,
                 std::vector<double> frequencies, double sign);

  Eigen::VectorXcd phi(std::size_t seed, double t) const;
  /// (1/m) sum_n sum_X grade_X |phi_X^(n)(t)|^2.
  double weighted(double t) const;
  std::size_t seeds() const { return static_cast<std::size_t>(seeds_.cols()); }

 private:
  Eigen::MatrixXcd seeds_;
  Eigen::MatrixXcd members_adj_;
  Eigen::VectorXd grades_;
  Eigen::VectorXd freq_;
};

/// Trapezoidal average of f over [0, T] on `samples` uniform points.
template <typename F>
double trapezoid_average(F&& f, double T, std::size_t samples) {
  const double dt = T / static_cast<double>(samples - 1);
  double acc = 0.5 * (f(0.0) + f(T));
  for (std::size_t k = 1; k + 1 < samples; ++k) acc += f(dt * static_cast<double>(k));
  return acc / static_cast<double>(samples - 1);
}

// ---------------------------------------------------------------- operators

/// phi_{J,k}^(n)(t) = <O_{J,k}| e^{iLt} |O_{0,n}> for every basis member.
std::vector<std::complex<double>> phi_coefficients(const models::SpectralDecomposition& spectral,
                                                   const krylov::BlockKrylovBasis& basis, std::size_t seed, double t);

/// C_mult(t) on the given time grid.
TimeSeries c_mult_timeseries(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                             const std::vector<double>& grid);

/// Closed-form all-time average of C_mult over frequency clusters.
PlateauResult plateau_operator(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis);

/// 200 / (smallest nonzero gap between frequency clusters).
double default_oracle_horizon(const models::Clustering& clusters);

/// Trapezoidal time average of C_mult over [0, T]; independent check of
/// plateau_operator. Requires T > 0 and samples >= 1000.
double time_average_oracle(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                           double T, std::size_t samples);

// ---------------------------------------------------------------- states

TimeSeries c_state_timeseries(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                              const std::vector<double>& grid);
/// All-time average of the multiseed spread complexity over energy clusters.
PlateauResult plateau_state(const models::SpectralDecomposition& spectral, const models::Clustering& energy_clusters,
                            const krylov::BlockKrylovBasis& basis);
double state_time_average_oracle(const models::SpectralDecomposition& spectral, const krylov::BlockKrylovBasis& basis,
                                 double T, std::size_t samples);

// ---------------------------------------------------------------- operator size

/// s_simple(t): the size of each simple member under time evolution,
/// averaged over the simple set.
TimeSeries size_timeseries(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                           const std::vector<std::size_t>& simple, const std::vector<double>& grid);
/// Plateau of s_simple; M = max grade + 1 so that normalization divides by
/// the highest grade.
PlateauResult plateau_size(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                           const std::vector<std::size_t>& simple);
double size_time_average_oracle(const models::SpectralDecomposition& spectral, const seeds::GradedBasis& graded,
                                const std::vector<std::size_t>& simple, double T, std::size_t samples);

// ---------------------------------------------------------------- normalization

/// Divides both values by max(M_int, M_cha) - 1; for a shared denominator of
/// zero both values must be zero and the result is (0, 0).
std::pair<double, double> normalize_pair(double value_int, std::size_t M_int, double value_cha, std::size_t M_cha);

struct EnsembleStats {
  double mean = 0.0;
  double sem = 0.0;  ///< standard error of the mean (n - 1 sample deviation)
  std::size_t count = 0;
};

EnsembleStats ensemble_stats(const std::vector<double>& values);

}  // namespace multikrylov::complexity

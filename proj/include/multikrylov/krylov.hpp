#pragma once

// Single-seed Lanczos and block Lanczos with deflation and partial
// reorthogonalization, at working precision.
//
// Both recursions orthogonalize every new vector against the previous two
// levels (two-pass classical Gram-Schmidt). A running bound on the loss of
// orthogonality decides when the two most recent levels are additionally
// reorthogonalized against the whole basis; the trigger is sqrt(epsilon).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "multikrylov/hiprec.hpp"
#include "multikrylov/seeds.hpp"

namespace multikrylov::krylov {

/// Hermitian map driving the recursion (Liouvillian on operators, H on states).
using LinearMap = std::function<hiprec::HVector(const hiprec::HVector&)>;

enum class ReorthMode {
  Partial,    ///< full reorthogonalization only when the drift bound crosses sqrt(eps)
  Full,       ///< full reorthogonalization after every step
  LocalOnly,  ///< never reorthogonalize beyond the previous two levels
};

enum class ReorthDecision { None, Local, Full };

/// `Full` when the drift estimate exceeds the threshold, `Local` otherwise.
ReorthDecision reorth_policy_step(double drift_estimate, double threshold);

struct KrylovOptions {
  hiprec::Precision precision{};
  ReorthMode mode = ReorthMode::Partial;
  /// Record the measured orthogonality of each new level (quadratic cost).
  bool measure_drift = false;
  /// Stop as soon as the basis grows beyond this size (0 = no limit). Set to
  /// the dimension of the invariant subspace to detect amplified rounding
  /// noise posing as new directions.
  std::size_t dimension_limit = 0;
  /// A priori bound on ||L|| (0 = unknown). It seeds the running norm
  /// estimate, which otherwise only sees ||L q|| for the vectors applied so
  /// far and is tiny when the seeds are (nearly) conserved.
  double norm_bound = 0.0;
};

struct DriftLogEntry {
  std::size_t step = 0;
  double estimate = 0.0;  ///< bound on the overlap of the new level with all earlier ones
  double running = 0.0;   ///< running maximum since the last full reorthogonalization
  double measured = -1.0; ///< measured drift of the new level (-1 when not measured)
  bool reorthogonalized = false;
};

// ---------------------------------------------------------------- drift bound

/// Norm-wise block version of the omega recurrence. For the step that builds
/// level J+1 from level J it propagates bounds on ||Q_K^dagger Q_{J+1}|| from
/// the recurrence coefficients of levels K and J, plus a rounding term of
/// order eps ||L|| sqrt(n).
class DriftEstimator {
 public:
  struct Step {
    double a_norm = 0.0;        ///< ||A_J||_F (projection on level J)
    double prev_norm = 0.0;     ///< ||C_J||_F (projection on level J-1)
    double next_norm = 0.0;     ///< ||B_{J+1}||_F
    double next_sigma_min = 0.0;///< smallest singular value of B_{J+1}
    double deflated_norm = 0.0; ///< Frobenius norm of the dropped residuals
    std::size_t width = 1;      ///< p_J
  };

  DriftEstimator(double epsilon, std::size_t vector_length);

  /// Registers level 0 (orthonormal seeds).
  void start(std::size_t width);
  /// Propagates the bound to the new level; returns its row estimate.
  double update(const Step& step, double norm_estimate);
  /// Replaces the data of the last step (after it was recomputed).
  void revise_last(const Step& step);
  /// The two most recent levels were reorthogonalized against everything.
  void reset_after_full();

  double row_estimate() const { return row_estimate_; }
  /// Non-decreasing between resets.
  double running_estimate() const { return running_; }
  double floor() const;

 private:
  double eps_;
  double sqrt_n_;
  std::vector<Step> steps_;    // steps_[K]: data of the step that consumed level K
  std::vector<double> prev_;   // bound of level J-1 against level K
  std::vector<double> cur_;    // bound of level J against level K
  double row_estimate_ = 0.0;
  double running_ = 0.0;
};

// ---------------------------------------------------------------- single seed

struct LanczosRun {
  std::vector<hiprec::HVector> basis;
  std::vector<hiprec::HReal> a;  ///< a_j, j = 0..K-1
  std::vector<hiprec::HReal> b;  ///< b_j, j = 1..K-1 (b[0] couples vectors 0 and 1)
  std::size_t K = 0;
  double norm_estimate = 0.0;
  std::vector<DriftLogEntry> drift_log;
  std::size_t full_reorthogonalizations = 0;
};

/// Three-term recurrence L O_j = b_{j+1} O_{j+1} + a_j O_j + b_j O_{j-1},
/// terminated when b_{j+1} <= sqrt(eps) ||L||_est. The seed must be
/// normalized (ContractViolation otherwise).
LanczosRun lanczos(const LinearMap& apply, const hiprec::HVector& seed, const KrylovOptions& options);

// ---------------------------------------------------------------- block

/// Small dense coefficient block at working precision, row-major.
struct CoefficientBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<hiprec::HComplex> entries;

  CoefficientBlock() = default;
  CoefficientBlock(std::size_t r, std::size_t c, int bits);
  hiprec::HComplex& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const hiprec::HComplex& at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  double frobenius() const;
  double sigma_min() const;
};

struct BlockKrylovBasis {
  /// All basis vectors, level by level.
  std::vector<hiprec::HVector> vectors;
  /// Level J occupies vectors[offsets[J] .. offsets[J+1]).
  std::vector<std::size_t> offsets{0};
  /// A[J] = <Q_J | L Q_J>, p_J x p_J.
  std::vector<CoefficientBlock> A;
  /// C[J] = <Q_{J-1} | L Q_J>, p_{J-1} x p_J (empty for J = 0).
  std::vector<CoefficientBlock> C;
  /// B[J] (J >= 1): coordinates of the orthogonalized L Q_{J-1} in level J,
  /// p_J x p_{J-1}; the diagonal of each pivot is real positive.
  std::vector<CoefficientBlock> B;
  /// Norms of dropped (deflated) residuals, per step.
  std::vector<double> deflated_norms;
  double norm_estimate = 0.0;
  std::vector<DriftLogEntry> drift_log;
  std::size_t full_reorthogonalizations = 0;
  /// The run stopped because the basis outgrew KrylovOptions::dimension_limit.
  bool dimension_exceeded = false;

  std::size_t M() const { return offsets.size() - 1; }
  std::size_t size() const { return vectors.size(); }
  std::vector<std::size_t> widths() const;
  std::span<const hiprec::HVector> level(std::size_t J) const;
  /// Level index of every basis vector.
  std::vector<int> grades() const;
};

/// Block Lanczos from an orthonormal seed list. Level J+1 is L applied to
/// every member of level J, orthogonalized against levels J-1, J and the
/// members of J+1 found so far; residuals with norm <= sqrt(eps) ||L||_est
/// are deflated. Stops when a level deflates to width 0.
BlockKrylovBasis block_lanczos(const LinearMap& apply, std::vector<hiprec::HVector> seeds,
                               const KrylovOptions& options);
BlockKrylovBasis block_lanczos(const LinearMap& apply, const seeds::SeedFamily& seeds,
                               const KrylovOptions& options);

/// Largest |<O_{I,j}| L O_{J,k}>| over level pairs with |I - J| >= 2.
double block_tridiagonality_residual(const BlockKrylovBasis& basis, const LinearMap& apply);

}  // namespace multikrylov::krylov

#include "multikrylov/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "multikrylov/errors.hpp"

namespace multikrylov::krylov {

using hiprec::HComplex;
using hiprec::HReal;
using hiprec::HVector;

ReorthDecision reorth_policy_step(double drift_estimate, double threshold) {
  return drift_estimate > threshold ? ReorthDecision::Full : ReorthDecision::Local;
}

namespace {

ReorthDecision decide(ReorthMode mode, double estimate, double threshold) {
  switch (mode) {
    case ReorthMode::Full:
      return ReorthDecision::Full;
    case ReorthMode::LocalOnly:
      return ReorthDecision::Local;
    case ReorthMode::Partial:
      return reorth_policy_step(estimate, threshold);
  }
  return ReorthDecision::Local;
}

// Reorthogonalize vectors[first..] against everything before them.
void reorthogonalize_tail(std::vector<HVector>& vectors, std::size_t first) {
  for (std::size_t i = first; i < vectors.size(); ++i) {
    HVector v = hiprec::orthogonalize_against(vectors[i], std::span<const HVector>(vectors).first(i), 2).vector;
    hiprec::normalize(v);
    vectors[i] = std::move(v);
  }
}

void check_seed_norm(const HVector& v, const hiprec::Precision& precision) {
  const double dev = std::abs(hiprec::norm(v).to_double() - 1.0);
  if (dev > precision.reorth_threshold()) {
    throw ContractViolation("Lanczos seed is not normalized (| |seed| - 1 | = " + std::to_string(dev) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------- DriftEstimator

DriftEstimator::DriftEstimator(double epsilon, std::size_t vector_length)
    : eps_(epsilon), sqrt_n_(std::sqrt(static_cast<double>(std::max<std::size_t>(vector_length, 1)))) {}

double DriftEstimator::floor() const { return eps_ * sqrt_n_; }

void DriftEstimator::start(std::size_t width) {
  steps_.clear();
  prev_.clear();
  const double local = floor() * static_cast<double>(std::max<std::size_t>(width, 1));
  cur_.assign(1, local);
  row_estimate_ = local;
  running_ = local;
}

double DriftEstimator::update(const Step& step, double norm_estimate) {
  const std::size_t J = steps_.size();
  steps_.push_back(step);
  const double width = static_cast<double>(std::max<std::size_t>(step.width, 1));
  const double local = floor() * width;
  const double theta = eps_ * norm_estimate * sqrt_n_ * width;

  std::vector<double> next(J + 2, local);
  if (J >= 2) {
    const double sigma = step.next_sigma_min;
    for (std::size_t K = 0; K + 2 <= J; ++K) {
      const Step& sk = steps_[K];
      double num = sk.next_norm * cur_[K + 1] + sk.a_norm * cur_[K] + step.a_norm * cur_[K] +
                   step.prev_norm * prev_[K] + sk.deflated_norm + step.deflated_norm + theta;
      if (K >= 1) num += sk.prev_norm * cur_[K - 1];
      next[K] = sigma > 0.0 ? num / sigma : std::numeric_limits<double>::infinity();
    }
  }
  row_estimate_ = *std::max_element(next.begin(), next.end());
  running_ = std::max(running_, row_estimate_);
  prev_ = std::move(cur_);
  cur_ = std::move(next);
  return row_estimate_;
}

void DriftEstimator::revise_last(const Step& step) {
  if (!steps_.empty()) steps_.back() = step;
}

void DriftEstimator::reset_after_full() {
  const double local = floor() * static_cast<double>(std::max<std::size_t>(steps_.empty() ? 1 : steps_.back().width, 1));
  std::fill(prev_.begin(), prev_.end(), local);
  std::fill(cur_.begin(), cur_.end(), local);
  row_estimate_ = local;
  running_ = local;
}

// ---------------------------------------------------------------- lanczos

LanczosRun lanczos(const LinearMap& apply, const HVector& seed, const KrylovOptions& options) {
  const hiprec::Precision& prec = options.precision;
  if (seed.precision() != prec) throw ContractViolation("seed precision differs from the run precision");
  check_seed_norm(seed, prec);
  const int bits = prec.bits();
  const std::size_t n = seed.size();

  LanczosRun run;
  run.norm_estimate = options.norm_bound;
  run.basis.push_back(seed);
  DriftEstimator estimator(prec.epsilon(), n);
  estimator.start(1);

  for (std::size_t j = 0;; ++j) {
    HVector w = apply(run.basis[j]);
    run.norm_estimate = std::max(run.norm_estimate, hiprec::norm(w).to_double());

    HReal a = hiprec::inner(run.basis[j], w).re;
    hiprec::axpy(HComplex(-a, HReal(bits)), run.basis[j], w);
    if (j > 0) hiprec::axpy(HComplex(-run.b[j - 1], HReal(bits)), run.basis[j - 1], w);

    // second (local) pass against the previous two vectors
    const std::size_t lo = j > 0 ? j - 1 : 0;
    auto fix = hiprec::orthogonalize_against(std::move(w), std::span<const HVector>(run.basis).subspan(lo, j + 1 - lo), 1);
    w = std::move(fix.vector);
    a += fix.coefficients.back().re;
    run.a.push_back(a);

    HReal b_next = hiprec::norm(w);
    const double tau = prec.reorth_threshold() * run.norm_estimate;
    if (b_next.to_double() <= tau || run.basis.size() == n) {
      run.K = j + 1;
      break;
    }
    hiprec::normalize(w);
    run.basis.push_back(std::move(w));
    run.b.push_back(b_next);

    DriftEstimator::Step step;
    step.a_norm = std::abs(a.to_double());
    step.prev_norm = j > 0 ? run.b[j - 1].to_double() : 0.0;
    step.next_norm = b_next.to_double();
    step.next_sigma_min = b_next.to_double();
    step.width = 1;

    DriftLogEntry entry;
    entry.step = j + 1;
    entry.estimate = estimator.update(step, run.norm_estimate);
    entry.running = estimator.running_estimate();
    if (options.measure_drift) entry.measured = hiprec::orthogonality_drift(run.basis, j + 1).to_double();
    if (decide(options.mode, entry.estimate, prec.reorth_threshold()) == ReorthDecision::Full) {
      reorthogonalize_tail(run.basis, j);
      estimator.reset_after_full();
      entry.reorthogonalized = true;
      ++run.full_reorthogonalizations;
    }
    run.drift_log.push_back(entry);
  }
  return run;
}

// ---------------------------------------------------------------- block

CoefficientBlock::CoefficientBlock(std::size_t r, std::size_t c, int bits)
    : rows(r), cols(c), entries(r * c, HComplex(bits)) {}

double CoefficientBlock::frobenius() const {
  double s = 0.0;
  for (const HComplex& z : entries) s += std::norm(z.to_complex());
  return std::sqrt(s);
}

double CoefficientBlock::sigma_min() const {
  if (rows == 0 || cols == 0) return 0.0;
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j).to_complex();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().minCoeff();
}

std::vector<std::size_t> BlockKrylovBasis::widths() const {
  std::vector<std::size_t> p;
  for (std::size_t J = 0; J < M(); ++J) p.push_back(offsets[J + 1] - offsets[J]);
  return p;
}

std::span<const HVector> BlockKrylovBasis::level(std::size_t J) const {
  return std::span<const HVector>(vectors).subspan(offsets[J], offsets[J + 1] - offsets[J]);
}

std::vector<int> BlockKrylovBasis::grades() const {
  std::vector<int> g(vectors.size());
  for (std::size_t J = 0; J < M(); ++J)
    for (std::size_t i = offsets[J]; i < offsets[J + 1]; ++i) g[i] = static_cast<int>(J);
  return g;
}

BlockKrylovBasis block_lanczos(const LinearMap& apply, std::vector<HVector> seeds, const KrylovOptions& options) {
  if (seeds.empty()) throw ParameterError("block Lanczos needs a non-empty seed family");
  const hiprec::Precision& prec = options.precision;
  const int bits = prec.bits();
  const std::size_t n = seeds.front().size();
  for (const HVector& s : seeds) {
    if (s.precision() != prec) throw ContractViolation("seed precision differs from the run precision");
    if (s.size() != n) throw DimensionError("seed vectors of different lengths");
  }
  if (hiprec::orthogonality_drift(seeds).to_double() > prec.reorth_threshold()) {
    throw ContractViolation("block Lanczos seeds are not orthonormal");
  }

  BlockKrylovBasis basis;
  basis.norm_estimate = options.norm_bound;
  basis.vectors = std::move(seeds);
  basis.vectors.reserve(n);
  basis.offsets = {0, basis.vectors.size()};
  basis.C.emplace_back();
  basis.B.emplace_back();

  DriftEstimator estimator(prec.epsilon(), n);
  estimator.start(basis.vectors.size());

  struct Level {
    CoefficientBlock a, c, b;
    std::size_t accepted = 0;
    double deflated_sq = 0.0;
  };

  // Builds level J+1 by orthogonalizing L Q_J against basis.vectors[from..]
  // (levels J-1, J for a local step, everything for a full one) and appends
  // the accepted members.
  auto build_level = [&](std::size_t J, std::size_t from) {
    const std::size_t lo = J == 0 ? 0 : basis.offsets[J - 1];
    const std::size_t cur_begin = basis.offsets[J];
    const std::size_t cur_end = basis.offsets[J + 1];
    const std::size_t width = cur_end - cur_begin;

    std::vector<HVector> candidates;
    candidates.reserve(width);
    for (std::size_t k = 0; k < width; ++k) {
      candidates.push_back(apply(basis.vectors[cur_begin + k]));
      basis.norm_estimate = std::max(basis.norm_estimate, hiprec::norm(candidates.back()).to_double());
    }
    const double tau = prec.reorth_threshold() * basis.norm_estimate;

    Level lvl{CoefficientBlock(width, width, bits), CoefficientBlock(cur_begin - lo, width, bits),
              CoefficientBlock(width, width, bits)};
    for (std::size_t k = 0; k < width; ++k) {
      auto span = std::span<const HVector>(basis.vectors).subspan(from);
      auto res = hiprec::orthogonalize_against(std::move(candidates[k]), span, 2);
      for (std::size_t i = 0; i < res.coefficients.size(); ++i) {
        const std::size_t idx = from + i;
        HComplex& z = res.coefficients[i];
        if (idx < lo) continue;  // components on older levels are rounding debris
        if (idx < cur_begin) {
          lvl.c.at(idx - lo, k) = std::move(z);
        } else if (idx < cur_end) {
          lvl.a.at(idx - cur_begin, k) = std::move(z);
        } else {
          lvl.b.at(idx - cur_end, k) = std::move(z);
        }
      }
      const HReal rho = hiprec::norm(res.vector);
      const double rho_d = rho.to_double();
      if (rho_d <= tau || basis.vectors.size() >= n) {
        lvl.deflated_sq += rho_d * rho_d;
        continue;
      }
      hiprec::normalize(res.vector);
      lvl.b.at(lvl.accepted, k) = HComplex(rho, HReal(bits));
      basis.vectors.push_back(std::move(res.vector));
      ++lvl.accepted;
    }
    return lvl;
  };

  auto step_of = [&](const Level& lvl, const CoefficientBlock& b_trim, std::size_t J) {
    DriftEstimator::Step step;
    step.a_norm = lvl.a.frobenius();
    step.prev_norm = J > 0 ? lvl.c.frobenius() : 0.0;
    step.next_norm = b_trim.frobenius();
    step.next_sigma_min = b_trim.sigma_min();
    step.deflated_norm = std::sqrt(lvl.deflated_sq);
    step.width = basis.offsets[J + 1] - basis.offsets[J];
    return step;
  };

  auto trim = [&](const Level& lvl) {
    CoefficientBlock b_trim(lvl.accepted, lvl.b.cols, bits);
    for (std::size_t i = 0; i < lvl.accepted; ++i)
      for (std::size_t k = 0; k < lvl.b.cols; ++k) b_trim.at(i, k) = lvl.b.at(i, k);
    return b_trim;
  };

  for (std::size_t J = 0;; ++J) {
    const std::size_t lo = J == 0 ? 0 : basis.offsets[J - 1];
    const std::size_t cur_begin = basis.offsets[J];
    const std::size_t cur_end = basis.offsets[J + 1];

    DriftLogEntry entry;
    entry.step = J + 1;
    Level lvl = build_level(J, options.mode == ReorthMode::Full ? 0 : lo);
    bool full = options.mode == ReorthMode::Full;
    if (lvl.accepted > 0) {
      entry.estimate = estimator.update(step_of(lvl, trim(lvl), J), basis.norm_estimate);
      entry.running = estimator.running_estimate();
      if (!full && decide(options.mode, entry.estimate, prec.reorth_threshold()) == ReorthDecision::Full) {
        // Redo the step against the whole basis: drop the tentative level,
        // clean level J, and rebuild so that deflation sees true residuals.
        basis.vectors.resize(cur_end);
        reorthogonalize_tail(basis.vectors, cur_begin);
        lvl = build_level(J, 0);
        if (lvl.accepted > 0) estimator.revise_last(step_of(lvl, trim(lvl), J));
        full = true;
      }
    }
    if (full) {
      estimator.reset_after_full();
      entry.reorthogonalized = true;
      ++basis.full_reorthogonalizations;
    }

    basis.A.push_back(std::move(lvl.a));
    if (J > 0) basis.C.push_back(std::move(lvl.c));
    basis.deflated_norms.push_back(std::sqrt(lvl.deflated_sq));
    if (lvl.accepted == 0) break;

    basis.B.push_back(trim(lvl));
    basis.offsets.push_back(basis.vectors.size());
    if (options.measure_drift) {
      entry.measured = hiprec::orthogonality_drift(basis.vectors, basis.offsets[J + 1]).to_double();
    }
    basis.drift_log.push_back(entry);
    if (options.dimension_limit > 0 && basis.size() > options.dimension_limit) {
      basis.dimension_exceeded = true;
      break;
    }
  }
  return basis;
}

BlockKrylovBasis block_lanczos(const LinearMap& apply, const seeds::SeedFamily& seeds, const KrylovOptions& options) {
  return block_lanczos(apply, seeds.vectors, options);
}

double block_tridiagonality_residual(const BlockKrylovBasis& basis, const LinearMap& apply) {
  const std::vector<int> grade = basis.grades();
  double worst = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const HVector lj = apply(basis.vectors[j]);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (std::abs(grade[i] - grade[j]) < 2) continue;
      worst = std::max(worst, hiprec::inner(basis.vectors[i], lj).abs().to_double());
    }
  }
  return worst;
}

}  // namespace multikrylov::krylov

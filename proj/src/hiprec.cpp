#include "multikrylov/hiprec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <utility>

#include "multikrylov/errors.hpp"

namespace multikrylov::hiprec {

namespace {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

struct Parts {
  const MpfrArray* re = nullptr;
  const MpfrArray* im = nullptr;
};

Parts parts_of(const HVector& v) {
  switch (v.phase()) {
    case Phase::Real:
      return {&v.primary(), nullptr};
    case Phase::Imaginary:
      return {nullptr, &v.primary()};
    case Phase::Complex:
      return {&v.primary(), &v.secondary()};
  }
  return {};
}

void check_same_shape(const HVector& a, const HVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("vector length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  if (a.precision() != b.precision()) {
    throw ContractViolation("mixed-precision vector operation");
  }
}

// acc += sign * sum_i x_i y_i
void dot_accumulate(mpfr_ptr acc, const MpfrArray& x, const MpfrArray& y, int sign, mpfr_ptr tmp) {
  const std::size_t n = x.size();
  if (sign > 0) {
    for (std::size_t i = 0; i < n; ++i) mpfr_fma(acc, x[i], y[i], acc, kRnd);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      mpfr_mul(tmp, x[i], y[i], kRnd);
      mpfr_sub(acc, acc, tmp, kRnd);
    }
  }
}

// y += s * x
void axpy_array(mpfr_srcptr s, const MpfrArray& x, MpfrArray& y) {
  if (mpfr_zero_p(s)) return;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) mpfr_fma(y[i], s, x[i], y[i], kRnd);
}

}  // namespace

// ---------------------------------------------------------------- Precision

Precision::Precision(int bits) : bits_(bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw ParameterError("precision must be between " + std::to_string(kMinBits) + " and " +
                         std::to_string(kMaxBits) + " bits, got " + std::to_string(bits));
  }
}

double Precision::epsilon() const { return std::ldexp(1.0, 1 - bits_); }

double Precision::reorth_threshold() const { return std::sqrt(epsilon()); }

// ---------------------------------------------------------------- MpfrArray

MpfrArray::MpfrArray(std::size_t n, int bits) : bits_(bits) {
  limbs_per_ = (mpfr_custom_get_size(bits) + sizeof(mp_limb_t) - 1) / sizeof(mp_limb_t);
  limbs_.assign(n * limbs_per_, 0);
  nums_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    void* significand = limbs_.data() + i * limbs_per_;
    mpfr_custom_init(significand, bits);
    mpfr_custom_init_set(&nums_[i], MPFR_ZERO_KIND, 0, bits, significand);
  }
}

MpfrArray::MpfrArray(const MpfrArray& other)
    : bits_(other.bits_), limbs_per_(other.limbs_per_), limbs_(other.limbs_) {
  bind_from(other);
}

MpfrArray& MpfrArray::operator=(const MpfrArray& other) {
  if (this != &other) {
    bits_ = other.bits_;
    limbs_per_ = other.limbs_per_;
    limbs_ = other.limbs_;
    bind_from(other);
  }
  return *this;
}

void MpfrArray::bind_from(const MpfrArray& other) {
  nums_.resize(other.nums_.size());
  for (std::size_t i = 0; i < nums_.size(); ++i) {
    const __mpfr_struct* src = &other.nums_[i];
    mpfr_custom_init_set(&nums_[i], mpfr_custom_get_kind(src), mpfr_custom_get_exp(src), bits_,
                         limbs_.data() + i * limbs_per_);
  }
}

// ---------------------------------------------------------------- HReal

HReal::HReal(int bits) {
  mpfr_init2(v_, bits);
  mpfr_set_zero(v_, 1);
}

HReal::HReal(double value, int bits) {
  mpfr_init2(v_, bits);
  mpfr_set_d(v_, value, kRnd);
}

HReal::HReal(const HReal& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, kRnd);
}

HReal::HReal(HReal&& other) noexcept {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_swap(v_, other.v_);
}

HReal& HReal::operator=(const HReal& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, kRnd);
  }
  return *this;
}

HReal& HReal::operator=(HReal&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

HReal::~HReal() { mpfr_clear(v_); }

std::string HReal::to_string(int digits) const {
  if (digits <= 0) digits = static_cast<int>(std::ceil(bits() * 0.30103)) + 2;
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

HReal HReal::from_string(const std::string& text, int bits) {
  HReal out(bits);
  if (mpfr_set_str(out.v_, text.c_str(), 10, kRnd) != 0) {
    throw ParameterError("not a number: '" + text + "'");
  }
  return out;
}

HReal& HReal::operator+=(const HReal& o) {
  mpfr_add(v_, v_, o.v_, kRnd);
  return *this;
}
HReal& HReal::operator-=(const HReal& o) {
  mpfr_sub(v_, v_, o.v_, kRnd);
  return *this;
}
HReal& HReal::operator*=(const HReal& o) {
  mpfr_mul(v_, v_, o.v_, kRnd);
  return *this;
}
HReal& HReal::operator/=(const HReal& o) {
  mpfr_div(v_, v_, o.v_, kRnd);
  return *this;
}
HReal HReal::operator-() const {
  HReal out(*this);
  mpfr_neg(out.v_, out.v_, kRnd);
  return out;
}

HReal sqrt(const HReal& x) {
  HReal out(x.bits());
  mpfr_sqrt(out.get(), x.get(), kRnd);
  return out;
}

HReal abs(const HReal& x) {
  HReal out(x.bits());
  mpfr_abs(out.get(), x.get(), kRnd);
  return out;
}

HReal HComplex::abs() const {
  HReal out(bits());
  mpfr_hypot(out.get(), re.get(), im.get(), kRnd);
  return out;
}

// ---------------------------------------------------------------- HVector

HVector::HVector(std::size_t n, Precision precision, Phase phase)
    : precision_(precision), phase_(phase), primary_(n, precision.bits()) {
  if (phase == Phase::Complex) secondary_ = MpfrArray(n, precision.bits());
}

HVector HVector::from_complex(std::span<const std::complex<double>> values, Precision precision) {
  const bool any_re = std::any_of(values.begin(), values.end(), [](auto z) { return z.real() != 0.0; });
  const bool any_im = std::any_of(values.begin(), values.end(), [](auto z) { return z.imag() != 0.0; });
  Phase phase = Phase::Real;
  if (any_im) phase = any_re ? Phase::Complex : Phase::Imaginary;

  HVector out(values.size(), precision, phase);
  for (std::size_t i = 0; i < values.size(); ++i) {
    switch (phase) {
      case Phase::Real:
        mpfr_set_d(out.primary_[i], values[i].real(), kRnd);
        break;
      case Phase::Imaginary:
        mpfr_set_d(out.primary_[i], values[i].imag(), kRnd);
        break;
      case Phase::Complex:
        mpfr_set_d(out.primary_[i], values[i].real(), kRnd);
        mpfr_set_d(out.secondary_[i], values[i].imag(), kRnd);
        break;
    }
  }
  return out;
}

std::complex<double> HVector::at(std::size_t i) const {
  const double a = mpfr_get_d(primary_[i], kRnd);
  switch (phase_) {
    case Phase::Real:
      return {a, 0.0};
    case Phase::Imaginary:
      return {0.0, a};
    case Phase::Complex:
      return {a, mpfr_get_d(secondary_[i], kRnd)};
  }
  return {};
}

std::vector<std::complex<double>> HVector::to_complex() const {
  std::vector<std::complex<double>> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = at(i);
  return out;
}

Eigen::VectorXcd HVector::to_eigen() const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) out(static_cast<Eigen::Index>(i)) = at(i);
  return out;
}

void HVector::make_complex() {
  switch (phase_) {
    case Phase::Complex:
      return;
    case Phase::Real:
      secondary_ = MpfrArray(size(), precision_.bits());
      break;
    case Phase::Imaginary:
      secondary_ = std::move(primary_);
      primary_ = MpfrArray(secondary_.size(), precision_.bits());
      break;
  }
  phase_ = Phase::Complex;
}

// ---------------------------------------------------------------- kernels

HComplex inner(const HVector& a, const HVector& b) {
  check_same_shape(a, b);
  const int bits = a.precision().bits();
  HComplex out(bits);
  HReal tmp(bits);

  if (a.phase() != Phase::Complex && b.phase() != Phase::Complex) {
    HReal d(bits);
    dot_accumulate(d.get(), a.primary(), b.primary(), +1, tmp.get());
    const bool a_real = a.phase() == Phase::Real;
    const bool b_real = b.phase() == Phase::Real;
    if (a_real == b_real) {
      out.re = std::move(d);
    } else if (a_real) {
      out.im = std::move(d);  // conj(1) * i
    } else {
      out.im = -d;  // conj(i) * 1
    }
    return out;
  }

  const Parts pa = parts_of(a);
  const Parts pb = parts_of(b);
  // re = ar br + ai bi ; im = ar bi - ai br
  if (pa.re && pb.re) dot_accumulate(out.re.get(), *pa.re, *pb.re, +1, tmp.get());
  if (pa.im && pb.im) dot_accumulate(out.re.get(), *pa.im, *pb.im, +1, tmp.get());
  if (pa.re && pb.im) dot_accumulate(out.im.get(), *pa.re, *pb.im, +1, tmp.get());
  if (pa.im && pb.re) dot_accumulate(out.im.get(), *pa.im, *pb.re, -1, tmp.get());
  return out;
}

HReal norm(const HVector& v) {
  const int bits = v.precision().bits();
  HReal acc(bits);
  HReal tmp(bits);
  dot_accumulate(acc.get(), v.primary(), v.primary(), +1, tmp.get());
  if (v.phase() == Phase::Complex) dot_accumulate(acc.get(), v.secondary(), v.secondary(), +1, tmp.get());
  mpfr_sqrt(acc.get(), acc.get(), kRnd);
  return acc;
}

void axpy(const HComplex& c, const HVector& x, HVector& y) {
  check_same_shape(x, y);
  if (c.re.is_zero() && c.im.is_zero()) return;

  if (x.phase() != Phase::Complex) {
    // c * x = w * x.primary with w = c (real x) or i c (imaginary x).
    const bool x_real = x.phase() == Phase::Real;
    HReal w_re = x_real ? c.re : -c.im;
    HReal w_im = x_real ? c.im : c.re;
    if (w_im.is_zero() || w_re.is_zero()) {
      const Phase product = w_im.is_zero() ? Phase::Real : Phase::Imaginary;
      const HReal& s = w_im.is_zero() ? w_re : w_im;
      if (y.phase() == product) {
        axpy_array(s.get(), x.primary(), y.primary());
        return;
      }
      if (y.phase() == Phase::Complex) {
        axpy_array(s.get(), x.primary(), product == Phase::Real ? y.primary() : y.secondary());
        return;
      }
    }
  }

  y.make_complex();
  const Parts px = parts_of(x);
  const HReal neg_im = -c.im;
  // y_re += c_re x_re - c_im x_im ; y_im += c_re x_im + c_im x_re
  if (px.re) {
    axpy_array(c.re.get(), *px.re, y.primary());
    axpy_array(c.im.get(), *px.re, y.secondary());
  }
  if (px.im) {
    axpy_array(neg_im.get(), *px.im, y.primary());
    axpy_array(c.re.get(), *px.im, y.secondary());
  }
}

void scale(HVector& v, const HReal& s) {
  for (std::size_t i = 0; i < v.size(); ++i) mpfr_mul(v.primary()[i], v.primary()[i], s.get(), kRnd);
  if (v.phase() == Phase::Complex) {
    for (std::size_t i = 0; i < v.size(); ++i) mpfr_mul(v.secondary()[i], v.secondary()[i], s.get(), kRnd);
  }
}

HReal normalize(HVector& v) {
  HReal n = norm(v);
  if (!n.is_zero()) {
    HReal inv(1.0, n.bits());
    inv /= n;
    scale(v, inv);
  }
  return n;
}

Orthogonalized orthogonalize_against(HVector v, std::span<const HVector> basis, int passes) {
  if (passes != 1 && passes != 2) throw ParameterError("orthogonalization passes must be 1 or 2");
  const int bits = v.precision().bits();
  std::vector<HComplex> total(basis.size(), HComplex(bits));
  std::vector<HComplex> coef;
  coef.reserve(basis.size());
  for (int pass = 0; pass < passes; ++pass) {
    coef.clear();
    for (const HVector& q : basis) coef.push_back(inner(q, v));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      axpy(HComplex(-coef[i].re, -coef[i].im), basis[i], v);
      total[i].re += coef[i].re;
      total[i].im += coef[i].im;
    }
  }
  return {std::move(v), std::move(total)};
}

HReal orthogonality_drift(std::span<const HVector> basis, std::size_t first_new) {
  if (basis.empty()) throw ParameterError("orthogonality_drift needs a non-empty basis");
  const int bits = basis.front().precision().bits();
  HReal worst(bits);
  const HReal one(1.0, bits);
  for (std::size_t j = first_new; j < basis.size(); ++j) {
    HReal dev = abs(norm(basis[j]) - one);
    if (dev > worst) worst = std::move(dev);
    for (std::size_t i = 0; i < j; ++i) {
      HReal overlap = inner(basis[i], basis[j]).abs();
      if (overlap > worst) worst = std::move(overlap);
    }
  }
  return worst;
}

// ---------------------------------------------------------------- HMatrix

HMatrix HMatrix::from_eigen(const Eigen::MatrixXcd& m, Precision precision, bool hermitian) {
  HMatrix out;
  out.rows_ = static_cast<std::size_t>(m.rows());
  out.cols_ = static_cast<std::size_t>(m.cols());
  out.precision_ = precision;

  if (hermitian) {
    if (m.rows() != m.cols()) throw ContractViolation("Hermitian matrix must be square");
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 8.0 * precision.epsilon() * scale) {
      throw ContractViolation("matrix is not Hermitian (max|A - A^dagger| = " + std::to_string(asym) + ")");
    }
    out.hermitian_ = true;
  }

  out.row_start_.assign(out.rows_ + 1, 0);
  std::vector<std::complex<double>> values;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::complex<double> z = m(i, j);
      if (z == 0.0) continue;
      out.entries_.push_back({static_cast<std::size_t>(j), values.size()});
      values.push_back(z);
      if (z.imag() != 0.0) out.real_ = false;
    }
    out.row_start_[static_cast<std::size_t>(i) + 1] = out.entries_.size();
  }

  const int bits = precision.bits();
  out.re_ = MpfrArray(values.size(), bits);
  out.im_ = MpfrArray(values.size(), bits);
  out.neg_re_ = MpfrArray(values.size(), bits);
  out.neg_im_ = MpfrArray(values.size(), bits);
  for (std::size_t s = 0; s < values.size(); ++s) {
    mpfr_set_d(out.re_[s], values[s].real(), kRnd);
    mpfr_set_d(out.im_[s], values[s].imag(), kRnd);
    mpfr_neg(out.neg_re_[s], out.re_[s], kRnd);
    mpfr_neg(out.neg_im_[s], out.im_[s], kRnd);
  }
  return out;
}

HMatrix HMatrix::from_terms(std::size_t rows, std::size_t cols, std::span<const MatrixTerm> terms,
                            Precision precision, bool hermitian) {
  if (hermitian && rows != cols) throw ContractViolation("Hermitian matrix must be square");
  std::vector<std::size_t> order(terms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const MatrixTerm& t : terms)
    if (t.row >= rows || t.col >= cols) throw DimensionError("matrix term outside the matrix");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(terms[a].row, terms[a].col) < std::pair(terms[b].row, terms[b].col);
  });

  HMatrix out;
  out.rows_ = rows;
  out.cols_ = cols;
  out.precision_ = precision;
  out.hermitian_ = hermitian;
  out.row_start_.assign(rows + 1, 0);

  const int bits = precision.bits();
  HReal re(bits), im(bits), root(bits), part(bits);
  std::vector<HReal> re_values, im_values;
  for (std::size_t k = 0; k < order.size();) {
    const std::size_t r = terms[order[k]].row;
    const std::size_t c = terms[order[k]].col;
    mpfr_set_zero(re.get(), 1);
    mpfr_set_zero(im.get(), 1);
    for (; k < order.size() && terms[order[k]].row == r && terms[order[k]].col == c; ++k) {
      const MatrixTerm& t = terms[order[k]];
      mpfr_set_ui(root.get(), static_cast<unsigned long>(t.radicand), kRnd);
      mpfr_sqrt(root.get(), root.get(), kRnd);
      mpfr_mul_d(part.get(), root.get(), t.coeff.real(), kRnd);
      mpfr_add(re.get(), re.get(), part.get(), kRnd);
      mpfr_mul_d(part.get(), root.get(), t.coeff.imag(), kRnd);
      mpfr_add(im.get(), im.get(), part.get(), kRnd);
    }
    if (mpfr_zero_p(re.get()) && mpfr_zero_p(im.get())) continue;
    if (!mpfr_zero_p(im.get())) out.real_ = false;
    out.entries_.push_back({c, re_values.size()});
    ++out.row_start_[r + 1];
    re_values.push_back(re);
    im_values.push_back(im);
  }
  for (std::size_t i = 0; i < rows; ++i) out.row_start_[i + 1] += out.row_start_[i];

  const std::size_t n = re_values.size();
  out.re_ = MpfrArray(n, bits);
  out.im_ = MpfrArray(n, bits);
  out.neg_re_ = MpfrArray(n, bits);
  out.neg_im_ = MpfrArray(n, bits);
  for (std::size_t s = 0; s < n; ++s) {
    mpfr_set(out.re_[s], re_values[s].get(), kRnd);
    mpfr_set(out.im_[s], im_values[s].get(), kRnd);
    mpfr_neg(out.neg_re_[s], out.re_[s], kRnd);
    mpfr_neg(out.neg_im_[s], out.im_[s], kRnd);
  }

  if (hermitian) {
    const Eigen::MatrixXcd m = out.to_eigen();
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 8.0 * std::numeric_limits<double>::epsilon() * scale) {
      throw ContractViolation("matrix is not Hermitian (max|A - A^dagger| = " + std::to_string(asym) + ")");
    }
  }
  return out;
}

std::span<const HMatrix::Entry> HMatrix::row(std::size_t i) const {
  return std::span<const Entry>(entries_).subspan(row_start_[i], row_start_[i + 1] - row_start_[i]);
}

Eigen::MatrixXcd HMatrix::to_eigen() const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (const Entry& e : row(i)) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = {
          mpfr_get_d(re_[e.slot], kRnd), mpfr_get_d(im_[e.slot], kRnd)};
    }
  }
  return out;
}

HVector HMatrix::apply(const HVector& v) const {
  if (v.size() != cols_) throw DimensionError("matrix-vector size mismatch");
  if (v.precision() != precision_) throw ContractViolation("mixed-precision matrix-vector product");

  if (real_ && v.phase() != Phase::Complex) {
    HVector out(rows_, precision_, v.phase());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (const Entry& e : row(i)) mpfr_fma(out.primary()[i], re_[e.slot], v.primary()[e.col], out.primary()[i], kRnd);
    }
    return out;
  }

  HVector out(rows_, precision_, Phase::Complex);
  const Parts pv = parts_of(v);
  for (std::size_t i = 0; i < rows_; ++i) {
    mpfr_ptr yr = out.primary()[i];
    mpfr_ptr yi = out.secondary()[i];
    for (const Entry& e : row(i)) {
      // (hr + i hi)(vr + i vi)
      if (pv.re) {
        mpfr_fma(yr, re_[e.slot], (*pv.re)[e.col], yr, kRnd);
        mpfr_fma(yi, im_[e.slot], (*pv.re)[e.col], yi, kRnd);
      }
      if (pv.im) {
        mpfr_fma(yr, neg_im_[e.slot], (*pv.im)[e.col], yr, kRnd);
        mpfr_fma(yi, re_[e.slot], (*pv.im)[e.col], yi, kRnd);
      }
    }
  }
  return out;
}

HVector commutator(const HMatrix& h, const HVector& op) {
  if (!h.hermitian_) throw ContractViolation("commutator requires a Hermitian-flagged matrix");
  const std::size_t d = h.rows_;
  if (op.size() != d * d) {
    throw DimensionError("operator vector of length " + std::to_string(op.size()) +
                         " does not match a " + std::to_string(d) + "-dimensional Hamiltonian");
  }
  if (op.precision() != h.precision_) throw ContractViolation("mixed-precision commutator");

  if (h.real_ && op.phase() != Phase::Complex) {
    HVector out(d * d, h.precision_, op.phase());
    const MpfrArray& o = op.primary();
    MpfrArray& r = out.primary();
    for (std::size_t i = 0; i < d; ++i) {
      const auto row_i = h.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        mpfr_ptr acc = r[i * d + j];
        for (const auto& e : row_i) mpfr_fma(acc, h.re_[e.slot], o[e.col * d + j], acc, kRnd);
        for (const auto& e : h.row(j)) mpfr_fma(acc, h.neg_re_[e.slot], o[i * d + e.col], acc, kRnd);
      }
    }
    return out;
  }

  // General Hermitian h: (O h)_ij = sum_k O_ik conj(h_jk).
  HVector out(d * d, h.precision_, Phase::Complex);
  const Parts po = parts_of(op);
  MpfrArray& rr = out.primary();
  MpfrArray& ri = out.secondary();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      mpfr_ptr ar = rr[i * d + j];
      mpfr_ptr ai = ri[i * d + j];
      for (const auto& e : h.row(i)) {
        const std::size_t idx = e.col * d + j;
        if (po.re) {
          mpfr_fma(ar, h.re_[e.slot], (*po.re)[idx], ar, kRnd);
          mpfr_fma(ai, h.im_[e.slot], (*po.re)[idx], ai, kRnd);
        }
        if (po.im) {
          mpfr_fma(ar, h.neg_im_[e.slot], (*po.im)[idx], ar, kRnd);
          mpfr_fma(ai, h.re_[e.slot], (*po.im)[idx], ai, kRnd);
        }
      }
      for (const auto& e : h.row(j)) {
        const std::size_t idx = i * d + e.col;
        // subtract (or + i oi)(hr - i hi) = (or hr + oi hi) + i (oi hr - or hi)
        if (po.re) {
          mpfr_fma(ar, h.neg_re_[e.slot], (*po.re)[idx], ar, kRnd);
          mpfr_fma(ai, h.im_[e.slot], (*po.re)[idx], ai, kRnd);
        }
        if (po.im) {
          mpfr_fma(ar, h.neg_im_[e.slot], (*po.im)[idx], ar, kRnd);
          mpfr_fma(ai, h.neg_re_[e.slot], (*po.im)[idx], ai, kRnd);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- eigen

EigenDecomposition symmetric_eigen(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ContractViolation("symmetric_eigen needs a square matrix");
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  const double asym = m.size() ? (m - m.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 8.0 * Precision(53).epsilon() * scale) {
    throw ContractViolation("symmetric_eigen: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw ContractViolation("symmetric_eigen: solver failed");
  EigenDecomposition out;
  out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = solver.eigenvectors();
  return out;
}

EigenDecomposition symmetric_eigen(const HMatrix& m) {
  if (!m.is_hermitian()) throw ContractViolation("symmetric_eigen requires a Hermitian-flagged matrix");
  return symmetric_eigen(m.to_eigen());
}

}  // namespace multikrylov::hiprec

#pragma once

// Configurable-precision scalars, vectors and dense matrices backed by MPFR.
//
// Vectors carry a phase tag: a vector whose entries are all real, or all
// purely imaginary, stores a single array of reals. Real Hamiltonians acting
// on such vectors (and Gram-Schmidt between them) never leave that class, so
// the hot kernels run on one array instead of four-multiply complex
// arithmetic. General complex vectors store both parts.

#include <complex>
#include <cstdint>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <mpfr.h>
#include <Eigen/Dense>

namespace multikrylov::hiprec {

/// Mantissa width of the working arithmetic.
class Precision {
 public:
  static constexpr int kDefaultBits = 256;
  static constexpr int kMinBits = 53;
  static constexpr int kMaxBits = 1000;

  explicit Precision(int bits = kDefaultBits);

  int bits() const { return bits_; }
  /// Unit roundoff 2^(1-bits).
  double epsilon() const;
  /// sqrt(epsilon): reorthogonalization trigger and deflation scale.
  double reorth_threshold() const;

  friend bool operator==(const Precision&, const Precision&) = default;

 private:
  int bits_;
};

/// Contiguous block of MPFR numbers of one precision. Significands live in a
/// single allocation so that sweeps over a vector stay cache friendly.
class MpfrArray {
 public:
  MpfrArray() = default;
  MpfrArray(std::size_t n, int bits);
  MpfrArray(const MpfrArray& other);
  MpfrArray& operator=(const MpfrArray& other);
  MpfrArray(MpfrArray&&) noexcept = default;
  MpfrArray& operator=(MpfrArray&&) noexcept = default;
  ~MpfrArray() = default;

  std::size_t size() const { return nums_.size(); }
  int bits() const { return bits_; }
  mpfr_ptr operator[](std::size_t i) { return &nums_[i]; }
  mpfr_srcptr operator[](std::size_t i) const { return &nums_[i]; }

 private:
  void bind_from(const MpfrArray& other);

  int bits_ = 0;
  std::size_t limbs_per_ = 0;
  std::vector<mp_limb_t> limbs_;
  std::vector<__mpfr_struct> nums_;
};

/// RAII real scalar at a fixed precision.
class HReal {
 public:
  explicit HReal(int bits = Precision::kDefaultBits);
  HReal(double value, int bits);
  HReal(const HReal& other);
  HReal(HReal&& other) noexcept;
  HReal& operator=(const HReal& other);
  HReal& operator=(HReal&& other) noexcept;
  ~HReal();

  int bits() const { return static_cast<int>(mpfr_get_prec(v_)); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  /// Decimal rendering with `digits` significant digits (0 = enough to
  /// round-trip at this precision).
  std::string to_string(int digits = 0) const;
  static HReal from_string(const std::string& text, int bits);

  HReal& operator+=(const HReal& o);
  HReal& operator-=(const HReal& o);
  HReal& operator*=(const HReal& o);
  HReal& operator/=(const HReal& o);
  HReal operator-() const;

  friend HReal operator+(HReal a, const HReal& b) { return a += b; }
  friend HReal operator-(HReal a, const HReal& b) { return a -= b; }
  friend HReal operator*(HReal a, const HReal& b) { return a *= b; }
  friend HReal operator/(HReal a, const HReal& b) { return a /= b; }
  friend bool operator<(const HReal& a, const HReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const HReal& a, const HReal& b) { return b < a; }
  friend bool operator<=(const HReal& a, const HReal& b) { return !(b < a); }
  friend bool operator>=(const HReal& a, const HReal& b) { return !(a < b); }
  friend bool operator==(const HReal& a, const HReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

 private:
  mpfr_t v_;
};

HReal sqrt(const HReal& x);
HReal abs(const HReal& x);

struct HComplex {
  HReal re;
  HReal im;

  explicit HComplex(int bits = Precision::kDefaultBits) : re(bits), im(bits) {}
  HComplex(HReal r, HReal i) : re(std::move(r)), im(std::move(i)) {}

  int bits() const { return re.bits(); }
  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  HReal abs() const;
  HComplex conj() const { return {re, -im}; }
};

enum class Phase {
  Real,       ///< all entries real
  Imaginary,  ///< all entries i * real
  Complex,
};

/// Dense complex vector at working precision. For Real and Imaginary
/// phases only the primary array is stored (the real coefficient); Complex
/// vectors store real parts in the primary and imaginary parts in the
/// secondary array.
class HVector {
 public:
  HVector() = default;
  HVector(std::size_t n, Precision precision, Phase phase = Phase::Real);

  /// Exact promotion of double entries. The phase is detected from the data.
  static HVector from_complex(std::span<const std::complex<double>> values, Precision precision);

  std::size_t size() const { return primary_.size(); }
  const Precision& precision() const { return precision_; }
  Phase phase() const { return phase_; }

  std::complex<double> at(std::size_t i) const;
  std::vector<std::complex<double>> to_complex() const;
  Eigen::VectorXcd to_eigen() const;

  MpfrArray& primary() { return primary_; }
  const MpfrArray& primary() const { return primary_; }
  MpfrArray& secondary() { return secondary_; }
  const MpfrArray& secondary() const { return secondary_; }

  /// Switch to general storage, keeping the values.
  void make_complex();

 private:
  Precision precision_{};
  Phase phase_ = Phase::Real;
  MpfrArray primary_;
  MpfrArray secondary_;
};

/// <a|b> = sum conj(a_i) b_i.
HComplex inner(const HVector& a, const HVector& b);
HReal norm(const HVector& v);
/// y += c * x
void axpy(const HComplex& c, const HVector& x, HVector& y);
void scale(HVector& v, const HReal& s);
/// Divides by the norm and returns it. A zero vector is left untouched.
HReal normalize(HVector& v);

struct Orthogonalized {
  HVector vector;
  /// Accumulated projection coefficients <basis_i|v> over all passes.
  std::vector<HComplex> coefficients;
};

/// Classical Gram-Schmidt against `basis`, repeated `passes` times (1 or 2).
/// A zero result is valid and signals linear dependence.
Orthogonalized orthogonalize_against(HVector v, std::span<const HVector> basis, int passes = 2);

/// max over i != j of |<b_i|b_j>| combined with max_i | |b_i| - 1 |.
/// With `first_new` > 0 only pairs touching an index >= first_new and the
/// norms of those members are considered (orthogonality of a freshly
/// appended block against everything before it).
HReal orthogonality_drift(std::span<const HVector> basis, std::size_t first_new = 0);

/// Dense complex matrix at working precision with a cached row sparsity
/// pattern; zero entries are skipped by the products.
/// One contribution coeff * sqrt(radicand) to entry (row, col).
struct MatrixTerm {
  std::size_t row = 0;
  std::size_t col = 0;
  std::complex<double> coeff;
  std::uint64_t radicand = 1;
};

class HMatrix {
 public:
  HMatrix() = default;
  /// Sums the terms of every entry at working precision, so identities that
  /// hold for the real-number parameters are not broken by double rounding.
  static HMatrix from_terms(std::size_t rows, std::size_t cols, std::span<const MatrixTerm> terms,
                            Precision precision, bool hermitian);
  /// `hermitian` requests the check max|A - A^dagger| <= 8 eps max|A|; a
  /// failing check throws ContractViolation.
  static HMatrix from_eigen(const Eigen::MatrixXcd& m, Precision precision, bool hermitian);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Precision& precision() const { return precision_; }
  bool is_hermitian() const { return hermitian_; }
  bool is_real() const { return real_; }

  /// Rounded to standard precision.
  Eigen::MatrixXcd to_eigen() const;

  /// Matrix-vector product at working precision.
  HVector apply(const HVector& v) const;

  struct Entry {
    std::size_t col;
    std::size_t slot;
  };
  std::span<const Entry> row(std::size_t i) const;
  mpfr_srcptr value_re(std::size_t slot) const { return re_[slot]; }
  mpfr_srcptr value_im(std::size_t slot) const { return im_[slot]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Precision precision_{};
  bool hermitian_ = false;
  bool real_ = true;
  std::vector<std::size_t> row_start_;
  std::vector<Entry> entries_;
  MpfrArray re_;
  MpfrArray im_;
  MpfrArray neg_re_;
  MpfrArray neg_im_;

  friend HVector commutator(const HMatrix& h, const HVector& op);
};

/// Flattened (row-major) h * O - O * h for a Hermitian h and an operator
/// vector of length rows^2. Never forms the d^2 x d^2 superoperator.
HVector commutator(const HMatrix& h, const HVector& op);

struct EigenDecomposition {
  std::vector<double> values;  ///< ascending
  Eigen::MatrixXcd vectors;    ///< columns orthonormal
};

/// Standard-precision Hermitian eigendecomposition.
EigenDecomposition symmetric_eigen(const HMatrix& m);
EigenDecomposition symmetric_eigen(const Eigen::MatrixXcd& m);

}  // namespace multikrylov::hiprec

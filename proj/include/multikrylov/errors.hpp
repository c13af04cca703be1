#pragma once

#include <stdexcept>
#include <string>

namespace multikrylov {

/// Operands with incompatible sizes (vector lengths, matrix shapes).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model, seed family or run parameter outside its valid domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (non-Hermitian input,
/// non-normalized seed, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration files, presets and record files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The working precision could not resolve the Krylov space: the basis kept
/// outgrowing the invariant-subspace dimension at the highest precision tried.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace multikrylov

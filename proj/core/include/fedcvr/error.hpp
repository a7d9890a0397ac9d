#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedcvr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance diagonal entry is (numerically) zero, so the client's
/// dimension is constant and carries no reducible uncertainty.
class ZeroDiagonal : public Error {
 public:
  explicit ZeroDiagonal(std::size_t index)
      : Error("zero diagonal entry at client " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A covariance submatrix failed its Cholesky factorization.
class SingularSubmatrix : public Error {
 public:
  using Error::Error;
};

/// Cosine similarity requested for a zero-norm parameter vector.
class ZeroVector : public Error {
 public:
  explicit ZeroVector(std::size_t index)
      : Error("zero-norm parameter vector at client " + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Local training produced a non-finite loss or gradient.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

/// Active-FL masking left fewer candidates than the participation budget.
class InsufficientPool : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedcvr

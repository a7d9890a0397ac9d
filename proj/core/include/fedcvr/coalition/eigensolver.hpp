#pragma once

#include <cstddef>
#include <cstdint>

#include "fedcvr/linalg.hpp"

namespace fedcvr::coalition {

enum class EigenMethod {
  /// Selected path up to kSelectedLimit rows, Krylov beyond.
  automatic,
  /// Full decomposition; the reference.
  dense,
  /// LAPACK dsyevr restricted to the wanted index range.
  selected,
  krylov,
};

inline constexpr std::size_t kSelectedLimit = 1000;

struct PartialEigenOptions {
  EigenMethod method = EigenMethod::automatic;
  /// Extra block columns beyond the requested count.
  std::size_t oversample = 8;
  /// Upper bound on the Krylov basis size; the dense solver is used when
  /// the basis would cover the whole space.
  std::size_t max_basis = 64;
  std::size_t max_restarts = 40;
  /// Residual tolerance relative to max(1, |largest Ritz value|).
  double tolerance = 1e-9;
  /// Stop early once no wanted Ritz value moves by more than this
  /// (relative, as above) between restarts.
  double stagnation = 1e-12;
  /// Optional starting vectors (one per column, n rows), e.g. the previous
  /// solution of a slowly changing matrix. Ignored when the row count does
  /// not match; missing columns are filled randomly.
  Matrix initial_block;
};

struct EigenPairs {
  /// Descending.
  Vector values;
  /// One eigenvector per column, unit norm.
  Matrix vectors;
  bool converged = true;
  EigenMethod method = EigenMethod::dense;
  /// Krylov restarts performed.
  std::size_t restarts = 0;
};

/// `count` algebraically largest eigenpairs of a symmetric matrix, by the
/// configured method. `seed` drives any random starting vectors.
EigenPairs largest_eigenpairs(const Matrix& a, std::size_t count, std::uint64_t seed,
                              const PartialEigenOptions& options = {});

/// Only the wanted pairs, through the tridiagonal form (LAPACK dsyevr).
/// The reduction is O(n^3) with a small constant; the rest is
/// O(n^2 count).
EigenPairs largest_eigenpairs_selected(const Matrix& a, std::size_t count, double tolerance = 1e-9);

/// Block Krylov subspace with full reorthogonalization and Rayleigh-Ritz
/// extraction, restarted from the best Ritz block. Each restart costs
/// O(n^2 m) for an m-column basis, so with m bounded the solve is
/// quadratic in n. Small problems go straight to a dense solver.
EigenPairs largest_eigenpairs_krylov(const Matrix& a, std::size_t count, std::uint64_t seed,
                                     const PartialEigenOptions& options = {});

/// Reference path: full dense decomposition.
EigenPairs largest_eigenpairs_dense(const Matrix& a, std::size_t count);

}  // namespace fedcvr::coalition

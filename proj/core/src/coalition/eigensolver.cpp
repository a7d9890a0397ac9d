#include "fedcvr/coalition/eigensolver.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedcvr/error.hpp"
#include "fedcvr/rng.hpp"

namespace fedcvr::coalition {

namespace {

// Orthogonalize `block` against the first `used` columns of `basis` (two
// classical Gram-Schmidt passes), then orthonormalize its columns among
// themselves, dropping any that fall below `drop_tol` relative to their
// incoming norm. Accepted columns are appended to `basis`. Returns how
// many were appended.
Eigen::Index append_orthonormal(Matrix& basis, Eigen::Index used, Matrix block, double drop_tol) {
  const Eigen::Index room = basis.cols() - used;
  Eigen::Index added = 0;
  for (Eigen::Index c = 0; c < block.cols() && added < room; ++c) {
    Vector v = block.col(c);
    const double incoming = v.norm();
    if (incoming == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::Index have = used + added;
      if (have > 0) {
        const auto q = basis.leftCols(have);
        v -= q * (q.transpose() * v);
      }
    }
    const double n = v.norm();
    if (n <= drop_tol * incoming) continue;
    basis.col(used + added) = v / n;
    ++added;
  }
  return added;
}


}  // namespace

EigenPairs largest_eigenpairs_dense(const Matrix& a, std::size_t count) {
  const Eigen::Index n = a.rows();
  const auto m = static_cast<Eigen::Index>(count);
  // divide and conquer; Eigen's tridiagonal QR stalls on big exact clusters
  Matrix work = a;
  Vector w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), work.data(),
                                         static_cast<lapack_int>(n), w.data());
  if (info != 0) throw Error("dense eigensolver failed (info " + std::to_string(info) + ")");
  EigenPairs out;
  out.values.resize(m);
  out.vectors.resize(n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.values(i) = w(n - 1 - i);
    out.vectors.col(i) = work.col(n - 1 - i);
  }
  out.method = EigenMethod::dense;
  return out;
}

EigenPairs largest_eigenpairs_selected(const Matrix& a, std::size_t count, double tolerance) {
  const auto n = static_cast<lapack_int>(a.rows());
  const auto want = static_cast<lapack_int>(count);
  Matrix work = a;
  Vector w(a.rows());
  Matrix z(a.rows(), static_cast<Eigen::Index>(count));
  std::vector<lapack_int> support(2 * count);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0,
                                         n - want + 1, n, 0.0, &found, w.data(), z.data(), n, support.data());
  if (info != 0) throw Error("eigensolver: dsyevr failed (info " + std::to_string(info) + ")");
  // MRRR can return short inside large exactly degenerate clusters
  if (found != want) return largest_eigenpairs_dense(a, count);

  EigenPairs out;
  out.method = EigenMethod::selected;
  out.values.resize(want);
  out.vectors.resize(a.rows(), want);
  for (Eigen::Index i = 0; i < want; ++i) {
    out.values(i) = w(want - 1 - i);
    out.vectors.col(i) = z.col(want - 1 - i);
  }
  const Matrix residual = a * out.vectors - out.vectors * out.values.asDiagonal();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < want; ++i) worst = std::max(worst, residual.col(i).norm());
  out.converged = worst <= tolerance * std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  return out;
}

EigenPairs largest_eigenpairs(const Matrix& a, std::size_t count, std::uint64_t seed,
                              const PartialEigenOptions& options) {
  if (a.rows() != a.cols()) throw Error("eigensolver: matrix must be square");
  if (count == 0 || static_cast<Eigen::Index>(count) > a.rows()) {
    throw Error("eigensolver: requested count out of range");
  }
  switch (options.method) {
    case EigenMethod::dense:
      return largest_eigenpairs_dense(a, count);
    case EigenMethod::selected:
      return largest_eigenpairs_selected(a, count, options.tolerance);
    case EigenMethod::krylov:
      return largest_eigenpairs_krylov(a, count, seed, options);
    case EigenMethod::automatic:
      break;
  }
  if (static_cast<std::size_t>(a.rows()) <= kSelectedLimit) {
    return largest_eigenpairs_selected(a, count, options.tolerance);
  }
  return largest_eigenpairs_krylov(a, count, seed, options);
}

EigenPairs largest_eigenpairs_krylov(const Matrix& a, std::size_t count, std::uint64_t seed,
                                     const PartialEigenOptions& options) {
  if (a.rows() != a.cols()) throw Error("eigensolver: matrix must be square");
  const Eigen::Index n = a.rows();
  const auto want = static_cast<Eigen::Index>(count);
  if (want == 0 || want > n) throw Error("eigensolver: requested count out of range");

  const Eigen::Index block = std::min<Eigen::Index>(n, want + static_cast<Eigen::Index>(options.oversample));
  const Eigen::Index max_basis = std::min<Eigen::Index>(
      n, std::max<Eigen::Index>(static_cast<Eigen::Index>(options.max_basis), 3 * block));
  if (max_basis >= n) return largest_eigenpairs_dense(a, count);

  CounterRng rng(seed);
  Matrix start(n, block);
  Eigen::Index warm = 0;
  if (options.initial_block.rows() == n) {
    warm = std::min<Eigen::Index>(block, options.initial_block.cols());
    start.leftCols(warm) = options.initial_block.leftCols(warm);
  }
  for (Eigen::Index c = warm; c < block; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) start(r, c) = rng.normal();
  }

  EigenPairs best;
  best.method = EigenMethod::krylov;
  Vector previous;
  Matrix basis(n, max_basis);
  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    best.restarts = restart;
    Eigen::Index used = append_orthonormal(basis, 0, start, 1e-10);
    Eigen::Index fresh_begin = 0;
    Eigen::Index fresh_end = used;
    while (used < max_basis && fresh_end > fresh_begin) {
      Matrix next = a * basis.middleCols(fresh_begin, fresh_end - fresh_begin);
      const Eigen::Index added = append_orthonormal(basis, used, std::move(next), 1e-10);
      fresh_begin = used;
      used += added;
      fresh_end = used;
    }

    const auto q = basis.leftCols(used);
    const Matrix aq = a * q;
    const Matrix h = q.transpose() * aq;
    const Eigen::Index keep = std::min(block, used);
    const EigenPairs small = largest_eigenpairs_dense(0.5 * (h + h.transpose()), static_cast<std::size_t>(keep));
    const Matrix& ritz_coeffs = small.vectors;
    const Vector& ritz_values = small.values;

    const Matrix vectors = q * ritz_coeffs.leftCols(want);
    const Matrix residual = aq * ritz_coeffs.leftCols(want) - vectors * ritz_values.head(want).asDiagonal();
    const double scale = std::max(1.0, std::abs(ritz_values(0)));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < want; ++i) worst = std::max(worst, residual.col(i).norm());

    best.values = ritz_values.head(want);
    best.vectors = vectors;
    best.converged = worst <= options.tolerance * scale;
    if (best.converged) return best;
    // Residuals of vectors inside a (near-)degenerate cluster stall while
    // their Ritz values have already settled; further restarts buy nothing.
    if (previous.size() == want &&
        (best.values - previous).cwiseAbs().maxCoeff() <= options.stagnation * scale) {
      return best;
    }
    previous = best.values;

    start = q * ritz_coeffs;
  }
  return best;
}

}  // namespace fedcvr::coalition

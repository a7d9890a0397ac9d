#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedcvr/coalition/eigensolver.hpp"
#include "fedcvr/coalition/kernels.hpp"
#include "fedcvr/coalition/partition.hpp"
#include "fedcvr/linalg.hpp"

namespace fedcvr::coalition {

inline constexpr std::size_t kDefaultKmeansIters = 300;
/// A row of the clustering affinity summing to at most this is degenerate.
inline constexpr double kDegenerateDegree = 1e-12;

/// Lloyd's k-means on the rows of `points` with greedy farthest-point
/// seeding. The first center is drawn from `seed`; later centers are the
/// points farthest from all chosen centers (ties to the lowest index).
/// Empty clusters are refilled with the point farthest from its centroid.
/// Every label in [0, clusters) is used.
std::vector<std::size_t> kmeans(const Matrix& points, std::size_t clusters, std::size_t iters,
                                std::uint64_t seed);

struct SpectralDiagnostics {
  /// Clients whose affinity row summed to ~0; each became a singleton.
  IndexSet degenerate;
  bool eigen_converged = true;
};

/// Normalized spectral clustering of the similarity matrix into
/// `clusters` coalitions.
///
/// The affinity is the symmetrized W with negatives clamped to zero and a
/// zero diagonal. Clients are embedded with the eigenvectors of the
/// smallest eigenvalues of I - D^-1/2 A D^-1/2, rows scaled to unit
/// length, then grouped with kmeans().
Partition spectral_cluster(const SimilarityMatrix& w, std::size_t clusters,
                           std::size_t kmeans_iters, std::uint64_t seed,
                           SpectralDiagnostics* diagnostics = nullptr,
                           const PartialEigenOptions& eigen_options = {});

}  // namespace fedcvr::coalition

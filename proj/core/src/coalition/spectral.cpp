#include "fedcvr/coalition/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "fedcvr/error.hpp"
#include "fedcvr/rng.hpp"

namespace fedcvr::coalition {

namespace {

Partition singletons(std::size_t k) {
  Partition p;
  p.blocks.reserve(k);
  for (std::size_t i = 0; i < k; ++i) p.blocks.push_back({i});
  return p;
}

Partition one_block(std::size_t k) {
  Partition p;
  p.blocks.emplace_back(k);
  for (std::size_t i = 0; i < k; ++i) p.blocks[0][i] = i;
  return p;
}

}  // namespace

Partition spectral_cluster(const SimilarityMatrix& w, std::size_t clusters, std::size_t kmeans_iters,
                           std::uint64_t seed, SpectralDiagnostics* diagnostics,
                           const PartialEigenOptions& eigen_options) {
  const Eigen::Index k = w.entries.rows();
  const auto n = static_cast<std::size_t>(k);
  if (w.entries.cols() != k) throw Error("spectral_cluster: similarity matrix must be square");
  if (clusters == 0 || clusters > n) throw Error("spectral_cluster: cluster count must lie in [1, K]");
  SpectralDiagnostics local;
  SpectralDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = {};

  if (clusters == 1) return one_block(n);
  if (clusters == n) return singletons(n);

  Matrix affinity = 0.5 * (w.entries + w.entries.transpose());
  affinity = affinity.cwiseMax(0.0);
  affinity.diagonal().setZero();

  const Vector degree = affinity.rowwise().sum();
  IndexSet active;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (degree(i) <= kDegenerateDegree) {
      diag.degenerate.push_back(static_cast<ClientId>(i));
    } else {
      active.push_back(static_cast<ClientId>(i));
    }
  }

  Partition out;
  if (diag.degenerate.size() >= clusters) {
    // Not enough room for every isolated client: the first clusters-1 keep
    // their own block, everything else shares the last one.
    IndexSet rest = active;
    for (std::size_t i = 0; i < diag.degenerate.size(); ++i) {
      if (i + 1 < clusters) {
        out.blocks.push_back({diag.degenerate[i]});
      } else {
        rest.push_back(diag.degenerate[i]);
      }
    }
    out.blocks.push_back(std::move(rest));
    canonicalize(out);
    return out;
  }
  for (const ClientId i : diag.degenerate) out.blocks.push_back({i});

  const std::size_t remaining = clusters - diag.degenerate.size();
  const auto m = static_cast<Eigen::Index>(active.size());
  if (remaining == active.size()) {
    for (const ClientId i : active) out.blocks.push_back({i});
    canonicalize(out);
    return out;
  }
  if (remaining == 1) {
    out.blocks.push_back(active);
    canonicalize(out);
    return out;
  }

  // Normalized affinity D^-1/2 A D^-1/2 restricted to the active clients.
  // Its largest eigenvectors are the smallest of the normalized Laplacian.
  Matrix normalized(m, m);
  Vector inv_sqrt(m);
  for (Eigen::Index a = 0; a < m; ++a) inv_sqrt(a) = 1.0 / std::sqrt(degree(static_cast<Eigen::Index>(active[static_cast<std::size_t>(a)])));
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ia = static_cast<Eigen::Index>(active[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto ib = static_cast<Eigen::Index>(active[static_cast<std::size_t>(b)]);
      normalized(a, b) = inv_sqrt(a) * affinity(ia, ib) * inv_sqrt(b);
    }
  }

  CounterRng streams(seed);
  const EigenPairs eig = largest_eigenpairs(normalized, remaining, streams.split("eigen").key(), eigen_options);
  diag.eigen_converged = eig.converged;

  Matrix embedding = eig.vectors;
  for (Eigen::Index r = 0; r < embedding.rows(); ++r) {
    const double norm = embedding.row(r).norm();
    if (norm > 0.0) embedding.row(r) /= norm;
  }

  const auto labels = kmeans(embedding, remaining, kmeans_iters, streams.split("kmeans").key());
  std::vector<IndexSet> groups(remaining);
  for (std::size_t a = 0; a < active.size(); ++a) groups[labels[a]].push_back(active[a]);
  for (auto& g : groups) out.blocks.push_back(std::move(g));
  canonicalize(out);
  return out;
}

}  // namespace fedcvr::coalition

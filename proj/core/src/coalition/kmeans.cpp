#include <algorithm>
#include <limits>

#include "fedcvr/coalition/spectral.hpp"
#include "fedcvr/error.hpp"
#include "fedcvr/rng.hpp"

namespace fedcvr::coalition {

namespace {

double sq_dist(const Matrix& points, Eigen::Index i, const Matrix& centers, Eigen::Index c) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < points.cols(); ++d) {
    const double diff = points(i, d) - centers(c, d);
    s += diff * diff;
  }
  return s;
}

Matrix farthest_point_centers(const Matrix& points, Eigen::Index clusters, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  CounterRng rng(seed);
  Matrix centers(clusters, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 1; c < clusters; ++c) {
    Eigen::Index pick = -1;
    double pick_dist = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& best = nearest[static_cast<std::size_t>(i)];
      best = std::min(best, sq_dist(points, i, centers, c - 1));
      if (chosen[static_cast<std::size_t>(i)]) continue;
      if (best > pick_dist) {
        pick_dist = best;
        pick = i;
      }
    }
    centers.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
  }
  return centers;
}

// Moves the point farthest from its own centroid into each empty cluster.
// Returns true if anything moved.
bool repair_empty(const Matrix& points, Matrix& centers, std::vector<std::size_t>& labels) {
  const Eigen::Index clusters = centers.rows();
  bool moved = false;
  for (;;) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(clusters), 0);
    for (const std::size_t l : labels) ++sizes[l];
    const auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
    if (empty == sizes.end()) return moved;
    const auto target = static_cast<Eigen::Index>(empty - sizes.begin());

    Eigen::Index donor = -1;
    double donor_dist = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const std::size_t l = labels[static_cast<std::size_t>(i)];
      if (sizes[l] < 2) continue;
      const double d = sq_dist(points, i, centers, static_cast<Eigen::Index>(l));
      if (d > donor_dist) {
        donor_dist = d;
        donor = i;
      }
    }
    labels[static_cast<std::size_t>(donor)] = static_cast<std::size_t>(target);
    centers.row(target) = points.row(donor);
    moved = true;
  }
}

}  // namespace

std::vector<std::size_t> kmeans(const Matrix& points, std::size_t clusters, std::size_t iters,
                                std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  const auto p = static_cast<Eigen::Index>(clusters);
  if (p == 0 || p > n) throw Error("kmeans: cluster count must lie in [1, number of points]");
  std::vector<std::size_t> labels(static_cast<std::size_t>(n), 0);
  if (p == 1) return labels;

  Matrix centers = farthest_point_centers(points, p, seed);
  bool first = true;
  for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
    bool changed = first;
    first = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_dist = sq_dist(points, i, centers, 0);
      for (Eigen::Index c = 1; c < p; ++c) {
        const double d = sq_dist(points, i, centers, c);
        if (d < best_dist) {
          best_dist = d;
          best = c;
        }
      }
      auto& slot = labels[static_cast<std::size_t>(i)];
      if (slot != static_cast<std::size_t>(best)) {
        slot = static_cast<std::size_t>(best);
        changed = true;
      }
    }
    if (repair_empty(points, centers, labels)) changed = true;
    if (!changed) break;

    Matrix sums = Matrix::Zero(p, points.cols());
    std::vector<double> counts(static_cast<std::size_t>(p), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t l = labels[static_cast<std::size_t>(i)];
      sums.row(static_cast<Eigen::Index>(l)) += points.row(i);
      counts[l] += 1.0;
    }
    for (Eigen::Index c = 0; c < p; ++c) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
  }
  return labels;
}

}  // namespace fedcvr::coalition

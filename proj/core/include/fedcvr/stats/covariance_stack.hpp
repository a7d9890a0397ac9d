#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedcvr/linalg.hpp"

namespace fedcvr::stats {

/// Data-size weights alpha_k = n_k / sum(n). Entries are non-negative and
/// sum to one.
class AggregationWeights {
 public:
  explicit AggregationWeights(Vector alpha);

  static AggregationWeights from_counts(std::span<const std::size_t> counts);
  static AggregationWeights uniform(std::size_t clients);

  const Vector& values() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(alpha_.size()); }
  double operator[](std::size_t k) const { return alpha_(static_cast<Eigen::Index>(k)); }

 private:
  Vector alpha_;
};

/// Step sizes for the stochastic-approximation covariance update.
struct GammaSchedule {
  enum class Kind { reciprocal, constant };

  Kind kind = Kind::reciprocal;
  double constant_value = 0.1;

  /// Step size at round t (t >= 1).
  double at(std::uint64_t t) const;
};

/// Server-side belief over the clients' tracked parameters: one K x K
/// covariance per tracked dimension and a K x D matrix of means.
class CovarianceStack {
 public:
  CovarianceStack(std::size_t clients, std::size_t dims, double init_variance = 1.0);

  std::size_t clients() const noexcept { return clients_; }
  std::size_t dims() const noexcept { return per_dim_.size(); }
  /// Number of the next update (starts at 1).
  std::uint64_t round() const noexcept { return round_; }

  const Matrix& covariance(std::size_t d) const { return per_dim_.at(d); }
  const std::vector<Matrix>& covariances() const noexcept { return per_dim_; }

  /// Row k holds client k's mean tracked vector.
  const Matrix& means() const noexcept { return means_; }
  Matrix& means() noexcept { return means_; }

  /// Robbins-Monro step for every dimension using the current round's
  /// step size. `theta` is K x D (row k = client k's tracked vector, stale
  /// for clients that were not observed). Advances the round counter.
  void observe(const Matrix& theta, const GammaSchedule& schedule);

  /// Replace one covariance matrix (symmetrized).
  void set_covariance(std::size_t d, const Matrix& c);

 private:
  std::size_t clients_;
  std::vector<Matrix> per_dim_;
  Matrix means_;
  std::uint64_t round_ = 1;
};

}  // namespace fedcvr::stats

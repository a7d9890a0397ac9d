#include "fedcvr/stats/covariance_stack.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedcvr/error.hpp"
#include "fedcvr/stats/variance_reduction.hpp"

namespace fedcvr::stats {

AggregationWeights::AggregationWeights(Vector alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() == 0) throw Error("aggregation weights: empty");
  for (Eigen::Index k = 0; k < alpha_.size(); ++k) {
    if (!(alpha_(k) >= 0.0)) throw Error("aggregation weights: negative entry");
  }
  if (std::abs(alpha_.sum() - 1.0) > 1e-12) {
    throw Error("aggregation weights: entries must sum to 1");
  }
}

AggregationWeights AggregationWeights::from_counts(std::span<const std::size_t> counts) {
  if (counts.empty()) throw Error("aggregation weights: no clients");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (total <= 0.0) throw Error("aggregation weights: all counts are zero");
  Vector alpha(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    alpha(static_cast<Eigen::Index>(k)) = static_cast<double>(counts[k]) / total;
  }
  // Absorb rounding so the simplex check holds to 1e-12.
  alpha /= alpha.sum();
  return AggregationWeights(std::move(alpha));
}

AggregationWeights AggregationWeights::uniform(std::size_t clients) {
  return AggregationWeights(Vector::Constant(static_cast<Eigen::Index>(clients),
                                             1.0 / static_cast<double>(clients)));
}

double GammaSchedule::at(std::uint64_t t) const {
  if (t == 0) throw std::invalid_argument("gamma schedule: rounds start at 1");
  switch (kind) {
    case Kind::reciprocal:
      return 1.0 / static_cast<double>(t);
    case Kind::constant:
      return constant_value;
  }
  return constant_value;
}

CovarianceStack::CovarianceStack(std::size_t clients, std::size_t dims, double init_variance)
    : clients_(clients),
      per_dim_(dims, Matrix::Identity(static_cast<Eigen::Index>(clients),
                                      static_cast<Eigen::Index>(clients)) *
                         init_variance),
      means_(Matrix::Zero(static_cast<Eigen::Index>(clients), static_cast<Eigen::Index>(dims))) {
  if (clients == 0) throw Error("covariance stack: no clients");
  if (!(init_variance > 0.0)) throw Error("covariance stack: init_variance must be positive");
}

void CovarianceStack::observe(const Matrix& theta, const GammaSchedule& schedule) {
  if (static_cast<std::size_t>(theta.rows()) != clients_ ||
      static_cast<std::size_t>(theta.cols()) != dims()) {
    throw Error("covariance stack: observation has shape " + std::to_string(theta.rows()) + "x" +
                std::to_string(theta.cols()));
  }
  const double gamma = schedule.at(round_);
  for (std::size_t d = 0; d < dims(); ++d) {
    const auto col = static_cast<Eigen::Index>(d);
    per_dim_[d] = robbins_monro_update(per_dim_[d], gamma, theta.col(col), means_.col(col));
  }
  ++round_;
}

void CovarianceStack::set_covariance(std::size_t d, const Matrix& c) {
  if (c.rows() != c.cols() || static_cast<std::size_t>(c.rows()) != clients_) {
    throw Error("covariance stack: wrong matrix shape");
  }
  per_dim_.at(d) = 0.5 * (c + c.transpose());
}

}  // namespace fedcvr::stats

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedcvr/error.hpp"
#include "fedcvr/policies/policy.hpp"

namespace fedcvr::policies {

Vector boltzmann_probs(const Vector& values, const IndexSet& coalition, double beta) {
  if (coalition.empty()) throw Error("boltzmann_probs: empty coalition");
  if (!(beta >= 0.0)) throw Error("boltzmann_probs: beta must be non-negative");
  const auto m = static_cast<Eigen::Index>(coalition.size());
  Vector logits(m);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(coalition[static_cast<std::size_t>(i)]);
    if (k >= values.size()) throw Error("boltzmann_probs: client index out of range");
    logits(i) = beta * values(k);
    top = std::max(top, logits(i));
  }
  Vector probs(m);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    // Floored so that far-behind members keep a (tiny) positive chance.
    probs(i) = std::max(std::exp(logits(i) - top), std::numeric_limits<double>::min());
    sum += probs(i);
  }
  return probs / sum;
}

}  // namespace fedcvr::policies

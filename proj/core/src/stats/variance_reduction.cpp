#include "fedcvr/stats/variance_reduction.hpp"

#include <algorithm>
#include <cmath>

#include "fedcvr/error.hpp"

namespace fedcvr::stats {

namespace {

void check_square(const Matrix& c, const AggregationWeights& alpha) {
  if (c.rows() != c.cols() || static_cast<std::size_t>(c.rows()) != alpha.size()) {
    throw Error("covariance and weights disagree on the number of clients");
  }
}

void check_subset(const IndexSet& subset, std::size_t k) {
  if (subset.empty()) throw Error("empty client subset");
  std::vector<bool> seen(k, false);
  for (const ClientId i : subset) {
    if (i >= k) throw Error("client subset index out of range");
    if (seen[i]) throw Error("client subset has a repeated index");
    seen[i] = true;
  }
}

struct SubsetSystem {
  Eigen::LLT<Matrix> factor;
  Vector rhs;
};

SubsetSystem factor_subset(const Matrix& c, const AggregationWeights& alpha, const IndexSet& subset) {
  check_square(c, alpha);
  check_subset(subset, alpha.size());
  const auto m = static_cast<Eigen::Index>(subset.size());
  const Vector c_alpha = c * alpha.values();
  Matrix c_aa(m, m);
  Vector rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<Eigen::Index>(subset[static_cast<std::size_t>(a)]);
    rhs(a) = c_alpha(i);
    for (Eigen::Index b = 0; b < m; ++b) {
      c_aa(a, b) = c(i, static_cast<Eigen::Index>(subset[static_cast<std::size_t>(b)]));
    }
  }
  SubsetSystem sys{Eigen::LLT<Matrix>(c_aa), std::move(rhs)};
  if (sys.factor.info() != Eigen::Success) {
    throw SingularSubmatrix("subset covariance is not positive definite");
  }
  const Vector diag = sys.factor.matrixLLT().diagonal();
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  if (!(lo > 0.0) || (hi / lo) * (hi / lo) > kMaxSubsetCondition) {
    throw SingularSubmatrix("subset covariance is numerically singular");
  }
  return sys;
}

}  // namespace

Vector value_vector_component(const Matrix& c, const AggregationWeights& alpha, OnZeroDiagonal on_zero) {
  check_square(c, alpha);
  const Vector c_alpha = c * alpha.values();
  Vector v(c_alpha.size());
  for (Eigen::Index k = 0; k < c_alpha.size(); ++k) {
    const double ckk = c(k, k);
    if (ckk < kZeroDiagonalThreshold) {
      if (on_zero == OnZeroDiagonal::raise) throw ZeroDiagonal(static_cast<std::size_t>(k));
      v(k) = 0.0;
      continue;
    }
    v(k) = c_alpha(k) * c_alpha(k) / ckk;
  }
  return v;
}

ValueVector total_value(const CovarianceStack& stack, const AggregationWeights& alpha, bool keep_per_dim) {
  ValueVector out;
  out.total = Vector::Zero(static_cast<Eigen::Index>(stack.clients()));
  if (keep_per_dim) out.per_dim.reserve(stack.dims());
  for (const Matrix& c : stack.covariances()) {
    Vector vd = value_vector_component(c, alpha, OnZeroDiagonal::substitute_zero);
    out.total += vd;
    if (keep_per_dim) out.per_dim.push_back(std::move(vd));
  }
  return out;
}

double variance_reduction_subset(const Matrix& c, const AggregationWeights& alpha, const IndexSet& subset) {
  const SubsetSystem sys = factor_subset(c, alpha, subset);
  return sys.rhs.dot(sys.factor.solve(sys.rhs));
}

Vector conditional_coeffs(const Matrix& c, const AggregationWeights& alpha, const IndexSet& subset) {
  const SubsetSystem sys = factor_subset(c, alpha, subset);
  return sys.factor.solve(sys.rhs);
}

double pearson(const Matrix& c, ClientId k, ClientId j) {
  const auto kk = static_cast<Eigen::Index>(k);
  const auto jj = static_cast<Eigen::Index>(j);
  if (kk >= c.rows() || jj >= c.rows()) throw Error("pearson: client index out of range");
  if (c(kk, kk) < kZeroDiagonalThreshold) throw ZeroDiagonal(k);
  if (c(jj, jj) < kZeroDiagonalThreshold) throw ZeroDiagonal(j);
  if (k == j) return 1.0;
  return c(kk, jj) / (std::sqrt(c(kk, kk)) * std::sqrt(c(jj, jj)));
}

ModelParams conditional_mean_update(double rho, const ModelParams& theta_sampled) {
  return rho * theta_sampled;
}

Matrix robbins_monro_update(const Matrix& c_prev, double gamma, const Vector& theta_d, const Vector& mean_d) {
  if (c_prev.rows() != c_prev.cols() || c_prev.rows() != theta_d.size() || theta_d.size() != mean_d.size()) {
    throw Error("robbins_monro_update: dimension mismatch");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("robbins_monro_update: gamma must lie in (0, 1]");
  const Vector dev = theta_d - mean_d;
  Matrix next = (1.0 - gamma) * c_prev;
  next.noalias() += gamma * dev * dev.transpose();
  return 0.5 * (next + next.transpose());
}

}  // namespace fedcvr::stats

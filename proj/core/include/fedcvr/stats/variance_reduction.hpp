#pragma once

#include <optional>
#include <vector>

#include "fedcvr/linalg.hpp"
#include "fedcvr/stats/covariance_stack.hpp"

namespace fedcvr::stats {

/// Diagonal entries below this are treated as a degenerate (constant) client.
inline constexpr double kZeroDiagonalThreshold = 1e-15;
/// Largest admissible condition-number estimate for a subset covariance.
inline constexpr double kMaxSubsetCondition = 1e12;

enum class OnZeroDiagonal { raise, substitute_zero };

/// Per-client variance reduction of the global model, summed over tracked
/// dimensions. `per_dim` is filled only on request.
struct ValueVector {
  Vector total;
  std::vector<Vector> per_dim;
};

/// v_k = ((C alpha)_k)^2 / C_kk for a single dimension.
///
/// Throws ZeroDiagonal on a degenerate diagonal entry unless asked to
/// substitute v_k = 0.
Vector value_vector_component(const Matrix& c, const AggregationWeights& alpha,
                              OnZeroDiagonal on_zero = OnZeroDiagonal::raise);

/// Sum of value_vector_component over every dimension of the stack.
/// Degenerate diagonals contribute zero.
ValueVector total_value(const CovarianceStack& stack, const AggregationWeights& alpha,
                        bool keep_per_dim = false);

/// Variance of the global model removed by observing the clients in
/// `subset`: (C alpha)_A^T (C_AA)^{-1} (C alpha)_A.
///
/// Throws SingularSubmatrix when C_AA is not numerically positive definite.
double variance_reduction_subset(const Matrix& c, const AggregationWeights& alpha,
                                 const IndexSet& subset);

/// Least-squares coefficients of the global model on the observed subset,
/// (C_AA)^{-1} (C alpha)_A.
Vector conditional_coeffs(const Matrix& c, const AggregationWeights& alpha,
                          const IndexSet& subset);

/// Pearson correlation between clients k and j under covariance C.
double pearson(const Matrix& c, ClientId k, ClientId j);

/// Conditional mean of an unobserved client in normalized coordinates,
/// rho * theta_sampled.
ModelParams conditional_mean_update(double rho, const ModelParams& theta_sampled);

/// (1 - gamma) C_prev + gamma * dev dev^T with dev = theta_d - mean_d,
/// symmetrized.
Matrix robbins_monro_update(const Matrix& c_prev, double gamma, const Vector& theta_d,
                            const Vector& mean_d);

}  // namespace fedcvr::stats

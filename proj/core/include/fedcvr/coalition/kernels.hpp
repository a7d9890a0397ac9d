#pragma once

#include <string>
#include <string_view>

#include "fedcvr/linalg.hpp"

namespace fedcvr::coalition {

enum class KernelKind { homophily_rbf, cosine, laplacian, sigmoid };

std::string_view to_string(KernelKind kind);
/// Throws ConfigError for an unknown name.
KernelKind parse_kernel_kind(std::string_view name);

struct KernelConfig {
  KernelKind kind = KernelKind::homophily_rbf;
  /// Scale for the RBF, laplacian and sigmoid kernels.
  double gamma = 1.0;
  /// Additive offset inside the sigmoid kernel's tanh.
  double sigmoid_offset = 0.0;
};

/// Client-by-client similarity. Row k of `params` passed to the builders
/// below is client k's parameter vector.
struct SimilarityMatrix {
  Matrix entries;
  KernelKind kind = KernelKind::homophily_rbf;
};

/// Row-stochastic homophily matrix
///   W_kj = exp(-gamma |theta_k - theta_j|^2) / sum_m exp(-gamma |theta_k - theta_m|^2).
SimilarityMatrix homophily_matrix(const Matrix& params, double gamma);

/// Similarity under the configured kernel. For cosine, a zero-norm client
/// gets similarity 0 to every other client (and 1 to itself).
SimilarityMatrix kernel_matrix(const Matrix& params, const KernelConfig& config);

/// <a, b> / (|a| |b|). Throws ZeroVector (with the given client ids) when
/// either vector has zero norm.
double cosine_similarity(const Vector& a, const Vector& b, ClientId a_id = 0, ClientId b_id = 1);

/// Rows scaled to unit Euclidean norm; zero rows stay zero.
Matrix normalize_rows(const Matrix& params);

/// rho_kj = <theta_k / |theta_k|, theta_j / |theta_j|>, with rho = 0
/// whenever either vector is zero, and rho_kk = 1.
Matrix normalized_inner_products(const Matrix& params);

}  // namespace fedcvr::coalition

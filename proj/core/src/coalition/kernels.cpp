#include "fedcvr/coalition/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedcvr/error.hpp"

namespace fedcvr::coalition {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::homophily_rbf: return "rbf";
    case KernelKind::cosine: return "cosine";
    case KernelKind::laplacian: return "laplacian";
    case KernelKind::sigmoid: return "sigmoid";
  }
  return "rbf";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "rbf" || name == "homophily_rbf" || name == "homophily") return KernelKind::homophily_rbf;
  if (name == "cosine") return KernelKind::cosine;
  if (name == "laplacian") return KernelKind::laplacian;
  if (name == "sigmoid") return KernelKind::sigmoid;
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

namespace {

// Entry-wise loops keep the summation order fixed and avoid the
// cancellation of the |a|^2 + |b|^2 - 2<a,b> expansion.
double squared_distance(const Matrix& p, Eigen::Index k, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < p.cols(); ++d) {
    const double diff = p(k, d) - p(j, d);
    s += diff * diff;
  }
  return s;
}

double l1_distance(const Matrix& p, Eigen::Index k, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < p.cols(); ++d) s += std::abs(p(k, d) - p(j, d));
  return s;
}

}  // namespace

SimilarityMatrix homophily_matrix(const Matrix& params, double gamma) {
  if (!(gamma >= 0.0)) throw Error("homophily_matrix: gamma must be non-negative");
  const Eigen::Index k = params.rows();
  Matrix w(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = r; c < k; ++c) {
      const double e = -gamma * squared_distance(params, r, c);
      w(r, c) = e;
      w(c, r) = e;
    }
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    const double top = w.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      w(r, c) = std::exp(w(r, c) - top);
      sum += w(r, c);
    }
    w.row(r) /= sum;
  }
  return {std::move(w), KernelKind::homophily_rbf};
}

double cosine_similarity(const Vector& a, const Vector& b, ClientId a_id, ClientId b_id) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0) throw ZeroVector(a_id);
  if (nb == 0.0) throw ZeroVector(b_id);
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Matrix normalize_rows(const Matrix& params) {
  Matrix out = params;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 0.0) out.row(r) /= n;
  }
  return out;
}

Matrix normalized_inner_products(const Matrix& params) {
  const Matrix unit = normalize_rows(params);
  Matrix rho = unit * unit.transpose();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) rho(r, c) = std::clamp(rho(r, c), -1.0, 1.0);
    rho(r, r) = 1.0;
  }
  return rho;
}

SimilarityMatrix kernel_matrix(const Matrix& params, const KernelConfig& config) {
  const Eigen::Index k = params.rows();
  switch (config.kind) {
    case KernelKind::homophily_rbf:
      return homophily_matrix(params, config.gamma);
    case KernelKind::cosine: {
      Matrix w = Matrix::Zero(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        w(r, r) = 1.0;
        for (Eigen::Index c = r + 1; c < k; ++c) {
          double s = 0.0;
          try {
            s = cosine_similarity(params.row(r).transpose(), params.row(c).transpose(),
                                  static_cast<ClientId>(r), static_cast<ClientId>(c));
          } catch (const ZeroVector&) {
            s = 0.0;
          }
          w(r, c) = s;
          w(c, r) = s;
        }
      }
      return {std::move(w), KernelKind::cosine};
    }
    case KernelKind::laplacian: {
      Matrix w(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        w(r, r) = 1.0;
        for (Eigen::Index c = r + 1; c < k; ++c) {
          const double s = std::exp(-config.gamma * l1_distance(params, r, c));
          w(r, c) = s;
          w(c, r) = s;
        }
      }
      return {std::move(w), KernelKind::laplacian};
    }
    case KernelKind::sigmoid: {
      const Matrix gram = params * params.transpose();
      Matrix w(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = r; c < k; ++c) {
          const double s = std::tanh(config.gamma * gram(r, c) + config.sigmoid_offset);
          w(r, c) = s;
          w(c, r) = s;
        }
      }
      return {std::move(w), KernelKind::sigmoid};
    }
  }
  throw Error("kernel_matrix: unknown kernel");
}

}  // namespace fedcvr::coalition

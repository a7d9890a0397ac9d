#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fedcvr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model parameters of a client or of the global model.
using ModelParams = Eigen::VectorXd;

/// Zero-based client index.
using ClientId = std::size_t;

/// Ordered list of distinct client indices.
using IndexSet = std::vector<ClientId>;

}  // namespace fedcvr

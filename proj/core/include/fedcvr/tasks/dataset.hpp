#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedcvr/linalg.hpp"

namespace fedcvr::tasks {

/// Feature rows and targets. For classification tasks `y` holds the class
/// index as a double.
struct Dataset {
  Matrix x;
  Vector y;
  /// Per-sample latent regression vectors; filled only when the generator
  /// runs with latents retained.
  Matrix latent;

  std::size_t size() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// One client's private data.
struct ClientData {
  Dataset train;
  Dataset test;
};

/// Columnar text format, one row per sample:
///   client_id,split,y,x_0,...,x_{F-1}
/// with every real printed to 17 significant digits, so reading it back
/// reproduces the doubles exactly.
void write_datasets_csv(std::ostream& out, const std::vector<ClientData>& clients);
std::vector<ClientData> read_datasets_csv(std::istream& in);

}  // namespace fedcvr::tasks

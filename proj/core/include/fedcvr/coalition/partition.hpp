#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedcvr/linalg.hpp"

namespace fedcvr::coalition {

/// Disjoint, covering, nonempty coalitions of client indices. Blocks are
/// sorted internally and ordered by their smallest member.
struct Partition {
  std::vector<IndexSet> blocks;
  std::uint64_t round = 0;

  std::size_t size() const noexcept { return blocks.size(); }
  std::size_t clients() const;
  /// Label of each client (block position).
  std::vector<std::size_t> labels() const;
  std::vector<std::size_t> block_sizes() const;
};

/// True when the blocks are nonempty, pairwise disjoint and cover {0..k-1}.
bool is_valid_partition(const Partition& p, std::size_t k);

/// Group clients by label; empty labels are dropped. Output is canonical.
Partition partition_from_labels(std::span<const std::size_t> labels);

/// Sort each block and order blocks by their smallest member.
void canonicalize(Partition& p);

/// Adjusted Rand Index between two labelings of the same items.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace fedcvr::coalition

#include "fedcvr/coalition/partition.hpp"

#include <algorithm>
#include <map>

#include "fedcvr/error.hpp"

namespace fedcvr::coalition {

std::size_t Partition::clients() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

std::vector<std::size_t> Partition::labels() const {
  std::vector<std::size_t> out(clients(), 0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const ClientId k : blocks[b]) {
      if (k >= out.size()) throw Error("partition: client index out of range");
      out[k] = b;
    }
  }
  return out;
}

std::vector<std::size_t> Partition::block_sizes() const {
  std::vector<std::size_t> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(b.size());
  return out;
}

bool is_valid_partition(const Partition& p, std::size_t k) {
  std::vector<bool> seen(k, false);
  std::size_t covered = 0;
  for (const auto& block : p.blocks) {
    if (block.empty()) return false;
    for (const ClientId c : block) {
      if (c >= k || seen[c]) return false;
      seen[c] = true;
      ++covered;
    }
  }
  return covered == k;
}

void canonicalize(Partition& p) {
  for (auto& b : p.blocks) std::sort(b.begin(), b.end());
  std::sort(p.blocks.begin(), p.blocks.end(),
            [](const IndexSet& x, const IndexSet& y) { return x.front() < y.front(); });
}

Partition partition_from_labels(std::span<const std::size_t> labels) {
  std::map<std::size_t, IndexSet> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  Partition p;
  for (auto& [label, members] : groups) p.blocks.push_back(std::move(members));
  canonicalize(p);
  return p;
}

namespace {
double choose2(double n) { return n * (n - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error("adjusted_rand_index: labelings differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, count] : table) index += choose2(count);
  double sum_rows = 0.0;
  for (const auto& [key, count] : rows) sum_rows += choose2(count);
  double sum_cols = 0.0;
  for (const auto& [key, count] : cols) sum_cols += choose2(count);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both labelings trivial and identical in structure
  return (index - expected) / (max_index - expected);
}

}  // namespace fedcvr::coalition

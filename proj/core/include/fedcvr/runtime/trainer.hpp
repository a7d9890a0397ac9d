#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fedcvr/linalg.hpp"
#include "fedcvr/rng.hpp"
#include "fedcvr/tasks/dataset.hpp"
#include "fedcvr/tasks/models.hpp"

namespace fedcvr::runtime {

struct TrainerConfig {
  /// Local epochs S; each epoch is one shuffled pass in mini-batches.
  std::size_t local_steps = 10;
  std::size_t batch_size = 100;
  double learning_rate = 0.01;

  void validate() const;
};

/// A client as seen by the simulator. `theta` is the last local model the
/// server received from it.
struct ClientState {
  ClientId id = 0;
  tasks::ClientData data;
  ModelParams theta;

  std::size_t samples() const noexcept { return data.train.size(); }
};

/// Mini-batch SGD on the client's training split starting at `init`.
/// Throws NonFiniteLoss if a loss or gradient stops being finite.
ModelParams local_train(const ModelParams& init, const tasks::Dataset& train, const tasks::Model& model,
                        const TrainerConfig& cfg, CounterRng& rng);

/// Sample-count weighted average of client updates. The sum runs in
/// ascending client order regardless of the input order.
ModelParams aggregate(std::span<const std::pair<ClientId, ModelParams>> updates,
                      std::span<const std::size_t> sample_counts);

/// Gather the tracked coordinates of `theta` in the given order.
Vector track_subset(const ModelParams& theta, const IndexSet& tracked_dims);

/// Every coordinate when dim <= full_threshold, otherwise a seeded subset
/// of `subset_size` coordinates (ascending).
IndexSet choose_tracked_dims(std::size_t dim, CounterRng rng, std::size_t full_threshold = 512,
                             std::size_t subset_size = 300);

}  // namespace fedcvr::runtime

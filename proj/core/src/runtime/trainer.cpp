#include "fedcvr/runtime/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedcvr/error.hpp"

namespace fedcvr::runtime {

void TrainerConfig::validate() const {
  if (local_steps == 0) throw ConfigError("trainer.local_steps must be >= 1");
  if (batch_size == 0) throw ConfigError("trainer.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("trainer.eta must be > 0");
}

namespace {

void check_finite(const tasks::LossGrad& lg, std::size_t epoch) {
  if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
    throw NonFiniteLoss("local training diverged in epoch " + std::to_string(epoch) +
                        " (loss=" + std::to_string(lg.loss) + "); lower the learning rate");
  }
}

}  // namespace

ModelParams local_train(const ModelParams& init, const tasks::Dataset& train, const tasks::Model& model,
                        const TrainerConfig& cfg, CounterRng& rng) {
  if (static_cast<std::size_t>(init.size()) != model.param_dim()) throw Error("local_train: dimension mismatch");
  if (train.size() == 0) throw Error("local_train: empty training split");
  ModelParams theta = init;
  const std::size_t n = train.size();

  if (cfg.batch_size >= n) {
    for (std::size_t epoch = 0; epoch < cfg.local_steps; ++epoch) {
      const tasks::LossGrad lg = model.loss_and_grad(theta, train.x, train.y);
      check_finite(lg, epoch);
      theta -= cfg.learning_rate * lg.grad;
    }
    return theta;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix xb;
  Vector yb;
  for (std::size_t epoch = 0; epoch < cfg.local_steps; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const auto m = static_cast<Eigen::Index>(end - begin);
      xb.resize(m, train.x.cols());
      yb.resize(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto src = static_cast<Eigen::Index>(order[begin + static_cast<std::size_t>(r)]);
        xb.row(r) = train.x.row(src);
        yb(r) = train.y(src);
      }
      const tasks::LossGrad lg = model.loss_and_grad(theta, xb, yb);
      check_finite(lg, epoch);
      theta -= cfg.learning_rate * lg.grad;
    }
  }
  return theta;
}

ModelParams aggregate(std::span<const std::pair<ClientId, ModelParams>> updates,
                      std::span<const std::size_t> sample_counts) {
  if (updates.empty()) throw Error("aggregate: no updates");
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return updates[a].first < updates[b].first; });

  double total = 0.0;
  for (const auto& [id, theta] : updates) {
    if (id >= sample_counts.size()) throw Error("aggregate: client index out of range");
    total += static_cast<double>(sample_counts[id]);
  }
  if (!(total > 0.0)) throw Error("aggregate: selected clients hold no samples");

  ModelParams out = ModelParams::Zero(updates.front().second.size());
  for (const std::size_t i : order) {
    const auto& [id, theta] = updates[i];
    if (theta.size() != out.size()) throw Error("aggregate: update dimensions differ");
    out += (static_cast<double>(sample_counts[id]) / total) * theta;
  }
  return out;
}

Vector track_subset(const ModelParams& theta, const IndexSet& tracked_dims) {
  Vector out(static_cast<Eigen::Index>(tracked_dims.size()));
  for (std::size_t i = 0; i < tracked_dims.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(tracked_dims[i]);
    if (d >= theta.size()) throw Error("track_subset: index out of range");
    out(static_cast<Eigen::Index>(i)) = theta(d);
  }
  return out;
}

IndexSet choose_tracked_dims(std::size_t dim, CounterRng rng, std::size_t full_threshold, std::size_t subset_size) {
  if (dim <= full_threshold || subset_size >= dim) {
    IndexSet all(dim);
    std::iota(all.begin(), all.end(), ClientId{0});
    return all;
  }
  return sample_without_replacement(dim, subset_size, rng);
}

}  // namespace fedcvr::runtime

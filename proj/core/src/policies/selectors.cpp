#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fedcvr/coalition/spectral.hpp"
#include "fedcvr/error.hpp"
#include "fedcvr/policies/policy.hpp"

namespace fedcvr::policies {

SelectionDecision select_uniform(std::size_t clients, std::size_t participants, CounterRng& rng) {
  if (participants == 0 || participants > clients) throw Error("select_uniform: need 1 <= P <= K");
  SelectionDecision out;
  out.selected = sample_without_replacement(clients, participants, rng);
  return out;
}

SelectionDecision select_power_of_choice(std::span<const double> losses, const stats::AggregationWeights& alpha,
                                         std::size_t candidates, std::size_t participants, CounterRng& rng) {
  const std::size_t k = losses.size();
  if (alpha.size() != k) throw Error("power_of_choice: losses and weights disagree on K");
  if (participants == 0 || participants > candidates || candidates > k) {
    throw Error("power_of_choice: need 1 <= P <= d <= K");
  }
  const auto& a = alpha.values();
  IndexSet pool = weighted_sample_without_replacement(std::span<const double>(a.data(), k), candidates, rng);
  std::sort(pool.begin(), pool.end(), [&](ClientId x, ClientId y) {
    if (losses[x] != losses[y]) return losses[x] > losses[y];
    return x < y;
  });
  SelectionDecision out;
  out.selected.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(participants));
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

SelectionDecision select_active_fl(std::span<const double> valuations, double alpha1, double alpha2, double alpha3,
                                   std::size_t participants, CounterRng& rng, std::vector<bool>* considered) {
  const std::size_t k = valuations.size();
  if (participants == 0 || participants > k) throw Error("active_fl: need 1 <= P <= K");
  if (!(alpha1 >= 0.0 && alpha1 < 1.0) || !(alpha3 >= 0.0 && alpha3 <= 1.0) || !(alpha2 >= 0.0)) {
    throw Error("active_fl: alpha1 in [0,1), alpha2 >= 0, alpha3 in [0,1] required");
  }
  if (considered && considered->size() != k) considered->assign(k, false);

  const auto uniform_count = static_cast<std::size_t>(std::llround(alpha3 * static_cast<double>(participants)));
  const std::size_t soft_count = participants - uniform_count;
  // Guard the ceiling against products like 0.2 * 10 = 2.0000000000000004.
  const auto pool_size = static_cast<std::size_t>(std::ceil((1.0 - alpha1) * static_cast<double>(k) - 1e-9));
  if (pool_size < soft_count) {
    throw InsufficientPool("active_fl: masking leaves " + std::to_string(pool_size) + " clients for a budget of " +
                           std::to_string(soft_count));
  }

  IndexSet order(k);
  std::iota(order.begin(), order.end(), ClientId{0});
  std::stable_sort(order.begin(), order.end(), [&](ClientId x, ClientId y) { return valuations[x] < valuations[y]; });
  const IndexSet pool(order.end() - static_cast<std::ptrdiff_t>(pool_size), order.end());

  std::vector<double> weights(pool.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const ClientId c : pool) top = std::max(top, alpha2 * valuations[c]);
  for (std::size_t i = 0; i < pool.size(); ++i) weights[i] = std::exp(alpha2 * valuations[pool[i]] - top);

  SelectionDecision out;
  std::vector<bool> taken(k, false);
  for (const std::size_t i : weighted_sample_without_replacement(weights, soft_count, rng)) {
    out.selected.push_back(pool[i]);
    taken[pool[i]] = true;
  }

  if (uniform_count > 0) {
    IndexSet fresh;
    for (ClientId c = 0; c < k; ++c) {
      if (!taken[c] && !(considered && (*considered)[c])) fresh.push_back(c);
    }
    if (fresh.size() < uniform_count) {
      fresh.clear();
      for (ClientId c = 0; c < k; ++c) {
        if (!taken[c]) fresh.push_back(c);
      }
    }
    for (const std::size_t i : sample_without_replacement(fresh.size(), uniform_count, rng)) {
      out.selected.push_back(fresh[i]);
    }
  }

  std::sort(out.selected.begin(), out.selected.end());
  if (considered) {
    for (const ClientId c : out.selected) (*considered)[c] = true;
  }
  return out;
}

SelectionDecision select_fedcvr(const stats::CovarianceStack& stack, const Matrix& params,
                                const stats::AggregationWeights& alpha, std::uint64_t round, const FedCvrConfig& cfg,
                                std::size_t participants, CounterRng& rng) {
  const std::size_t k = alpha.size();
  if (participants == 0 || participants > k) throw Error("fedcvr: need 1 <= P <= K");
  if (static_cast<std::size_t>(params.rows()) != k || stack.clients() != k) {
    throw Error("fedcvr: parameters, stack and weights disagree on K");
  }
  if (round <= cfg.warmup_rounds) return select_uniform(k, participants, rng);

  // Angle-based kernels see unit vectors; distance kernels see raw ones.
  const bool normalize = cfg.kernel.kind == coalition::KernelKind::cosine ||
                         cfg.kernel.kind == coalition::KernelKind::sigmoid;
  const coalition::SimilarityMatrix w =
      coalition::kernel_matrix(normalize ? coalition::normalize_rows(params) : params, cfg.kernel);

  SelectionDecision out;
  out.partition = coalition::spectral_cluster(w, participants, cfg.kmeans_iters, rng());
  out.partition->round = round;

  stats::ValueVector values = stats::total_value(stack, alpha);
  for (Eigen::Index i = 0; i < values.total.size(); ++i) {
    if (!std::isfinite(values.total(i))) values.total(i) = 0.0;
  }

  for (const IndexSet& block : out.partition->blocks) {
    Vector probs = boltzmann_probs(values.total, block, cfg.beta);
    std::size_t pick = 0;
    if (cfg.use_argmax) {
      for (std::size_t i = 1; i < block.size(); ++i) {
        if (values.total(static_cast<Eigen::Index>(block[i])) > values.total(static_cast<Eigen::Index>(block[pick]))) {
          pick = i;
        }
      }
    } else {
      pick = sample_categorical(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), rng);
    }
    out.selected.push_back(block[pick]);
    out.probs.push_back(std::move(probs));
  }
  out.values = std::move(values);
  return out;
}

}  // namespace fedcvr::policies

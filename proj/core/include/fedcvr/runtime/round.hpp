#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fedcvr/linalg.hpp"
#include "fedcvr/policies/policy.hpp"
#include "fedcvr/rng.hpp"
#include "fedcvr/runtime/trainer.hpp"
#include "fedcvr/stats/covariance_stack.hpp"
#include "fedcvr/tasks/models.hpp"

namespace fedcvr::runtime {

/// Source of the coefficient rho_kj used to move unobserved clients'
/// means toward their coalition's observed representative.
enum class RhoSource {
  /// Cosine of the tracked parameter vectors from the start of the round.
  normalized_inner_product,
  /// Per-dimension Pearson correlation from the covariance estimate.
  pearson,
};

struct ServerState {
  ModelParams theta_gl;
  stats::CovarianceStack stack;
  /// 1-based number of the round about to run.
  std::uint64_t round = 1;
  IndexSet tracked_dims;
  /// Loss of theta_gl on each client's test split (refreshed every round).
  std::vector<double> client_losses;
};

struct RoundOptions {
  /// Clients selected per round (P).
  std::size_t participants = 1;
  stats::GammaSchedule gamma;
  RhoSource rho = RhoSource::normalized_inner_product;
  bool record_wall_clock = false;
};

struct RoundMetrics {
  std::uint64_t round = 0;
  /// Global model's test loss, averaged over clients with equal weight.
  double global_test_loss = 0.0;
  /// Same for accuracy; NaN for regression.
  double global_test_acc = 0.0;
  /// sum_k alpha_k * train loss_k at the new global model.
  double global_train_loss = 0.0;
  std::vector<double> client_losses;
  /// |theta_gl(t+1) - theta_gl(t)| / learning_rate.
  double update_norm = 0.0;
  IndexSet selected;
  /// Empty when the policy did not partition the clients.
  std::vector<std::size_t> coalition_sizes;
  /// Zero unless wall-clock recording is enabled.
  double wall_ms = 0.0;
  double server_ms = 0.0;
};

/// Evaluate `theta` on every client's test split.
struct FederationEval {
  double mean_loss = 0.0;
  double mean_acc = 0.0;
  double loss_std = 0.0;
  double acc_std = 0.0;
  std::vector<double> losses;
};
FederationEval evaluate_global(const ModelParams& theta, const std::vector<ClientState>& clients,
                               const tasks::Model& model);

/// Tracked vectors of every client, one row per client.
Matrix tracked_matrix(const std::vector<ClientState>& clients, const IndexSet& tracked_dims);

/// One communication round: select, train the selected clients from the
/// broadcast model, update means and covariances, aggregate, evaluate.
/// `server` and `clients` are updated in place; `rng` is the experiment's
/// root stream (per-round streams are split from it).
RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients, policies::Policy& policy,
                       const tasks::Model& model, const stats::AggregationWeights& alpha,
                       const TrainerConfig& trainer, const RoundOptions& options, const CounterRng& rng);

}  // namespace fedcvr::runtime

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "fedcvr/coalition/kernels.hpp"
#include "fedcvr/coalition/partition.hpp"
#include "fedcvr/linalg.hpp"
#include "fedcvr/rng.hpp"
#include "fedcvr/stats/covariance_stack.hpp"
#include "fedcvr/stats/variance_reduction.hpp"

namespace fedcvr::policies {

/// FedAvg: uniform sampling without replacement.
struct UniformConfig {};

/// Power-of-Choice: draw `candidates` clients proportionally to their data
/// weights and keep the P with the highest loss on the global model.
struct PowerOfChoiceConfig {
  /// 0 means 2P.
  std::size_t candidates = 0;
};

/// Active FL: mask the lowest-valued fraction alpha1 of clients, sample
/// from softmax(alpha2 * valuation) over the rest, and reserve a fraction
/// alpha3 of the budget for never-selected clients.
struct ActiveFlConfig {
  double alpha1 = 0.8;
  double alpha2 = 1.0;
  double alpha3 = 0.0;
};

/// Coalition detection plus variance-reduction Boltzmann sampling.
struct FedCvrConfig {
  /// Inverse temperature of the within-coalition Boltzmann distribution.
  double beta = 1.0;
  /// Rounds 1..warmup_rounds select uniformly.
  std::size_t warmup_rounds = 30;
  coalition::KernelConfig kernel;
  /// Pick the highest-value client per coalition instead of sampling.
  bool use_argmax = false;
  std::size_t kmeans_iters = 300;
};

using PolicyConfig = std::variant<UniformConfig, PowerOfChoiceConfig, ActiveFlConfig, FedCvrConfig>;

/// "uniform", "power_of_choice", "active_fl" or "fedcvr_bolt".
std::string_view variant_name(const PolicyConfig& cfg);

/// Throws ConfigError when knobs are out of range for the given budget.
void validate(const PolicyConfig& cfg, std::size_t clients, std::size_t participants);

struct SelectionDecision {
  /// Chosen clients. With a partition, selected[p] is the pick from
  /// block p; otherwise ascending.
  IndexSet selected;
  std::optional<coalition::Partition> partition;
  /// Boltzmann distribution over each block's members (block order).
  std::vector<Vector> probs;
  std::optional<stats::ValueVector> values;
};

/// Stable softmax of beta * v restricted to the coalition members, in
/// coalition order. Entries are positive and sum to one.
Vector boltzmann_probs(const Vector& values, const IndexSet& coalition, double beta);

SelectionDecision select_uniform(std::size_t clients, std::size_t participants, CounterRng& rng);

/// `losses[k]` is client k's loss at the current global model.
SelectionDecision select_power_of_choice(std::span<const double> losses,
                                         const stats::AggregationWeights& alpha,
                                         std::size_t candidates, std::size_t participants,
                                         CounterRng& rng);

/// `considered` (optional, length K) marks clients selected in earlier
/// rounds; it is read by the alpha3 stage and updated with this round's
/// picks. Throws InsufficientPool when masking leaves too few clients.
SelectionDecision select_active_fl(std::span<const double> valuations, double alpha1, double alpha2,
                                   double alpha3, std::size_t participants, CounterRng& rng,
                                   std::vector<bool>* considered = nullptr);

/// One FedCVR-Bolt selection. `params` holds the tracked parameter
/// vectors (row k = client k), `round` is 1-based.
SelectionDecision select_fedcvr(const stats::CovarianceStack& stack, const Matrix& params,
                                const stats::AggregationWeights& alpha, std::uint64_t round,
                                const FedCvrConfig& cfg, std::size_t participants, CounterRng& rng);

/// Everything a policy may look at when choosing the round's clients.
struct RoundContext {
  std::uint64_t round = 1;
  std::size_t participants = 0;
  const stats::CovarianceStack* stack = nullptr;
  const Matrix* tracked_params = nullptr;
  const stats::AggregationWeights* alpha = nullptr;
  /// Loss of the broadcast global model on each client's test split.
  std::span<const double> client_losses;
};

/// Stateful wrapper dispatching on the configured variant.
class Policy {
 public:
  explicit Policy(PolicyConfig cfg) : cfg_(std::move(cfg)) {}

  SelectionDecision select(const RoundContext& ctx, CounterRng& rng);
  const PolicyConfig& config() const noexcept { return cfg_; }
  /// Whether select() reads client_losses.
  bool needs_losses() const noexcept;

 private:
  PolicyConfig cfg_;
  std::vector<bool> considered_;
};

}  // namespace fedcvr::policies

#include "fedcvr/runtime/round.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "fedcvr/coalition/kernels.hpp"
#include "fedcvr/error.hpp"

namespace fedcvr::runtime {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double population_std(const std::vector<double>& xs, double mean) {
  double s = 0.0;
  for (const double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// Without a partition (warm-up and baselines) each unobserved client joins
// the selected client whose tracked vector is nearest (ties to the lower
// index), so every client still gets a conditional-mean update.
std::vector<IndexSet> implicit_blocks(const Matrix& tracked, const IndexSet& selected) {
  std::vector<IndexSet> blocks(selected.size());
  std::vector<bool> is_selected(static_cast<std::size_t>(tracked.rows()), false);
  for (std::size_t p = 0; p < selected.size(); ++p) {
    blocks[p].push_back(selected[p]);
    is_selected[selected[p]] = true;
  }
  for (Eigen::Index k = 0; k < tracked.rows(); ++k) {
    if (is_selected[static_cast<std::size_t>(k)]) continue;
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < selected.size(); ++p) {
      const double d = (tracked.row(k) - tracked.row(static_cast<Eigen::Index>(selected[p]))).squaredNorm();
      if (d < best_dist || (d == best_dist && selected[p] < selected[best])) {
        best_dist = d;
        best = p;
      }
    }
    blocks[best].push_back(static_cast<ClientId>(k));
  }
  return blocks;
}

}  // namespace

FederationEval evaluate_global(const ModelParams& theta, const std::vector<ClientState>& clients,
                               const tasks::Model& model) {
  FederationEval out;
  out.losses.reserve(clients.size());
  std::vector<double> accs;
  accs.reserve(clients.size());
  for (const ClientState& c : clients) {
    const tasks::Evaluation e = model.evaluate(theta, c.data.test);
    out.losses.push_back(e.loss);
    accs.push_back(e.accuracy);
  }
  const double n = static_cast<double>(clients.size());
  for (const double l : out.losses) out.mean_loss += l;
  out.mean_loss /= n;
  out.loss_std = population_std(out.losses, out.mean_loss);
  if (model.has_accuracy()) {
    for (const double a : accs) out.mean_acc += a;
    out.mean_acc /= n;
    out.acc_std = population_std(accs, out.mean_acc);
  } else {
    out.mean_acc = std::numeric_limits<double>::quiet_NaN();
    out.acc_std = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Matrix tracked_matrix(const std::vector<ClientState>& clients, const IndexSet& tracked_dims) {
  Matrix out(static_cast<Eigen::Index>(clients.size()), static_cast<Eigen::Index>(tracked_dims.size()));
  for (std::size_t k = 0; k < clients.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = track_subset(clients[k].theta, tracked_dims).transpose();
  }
  return out;
}

RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients, policies::Policy& policy,
                       const tasks::Model& model, const stats::AggregationWeights& alpha,
                       const TrainerConfig& trainer, const RoundOptions& options, const CounterRng& rng) {
  const auto round_start = Clock::now();
  const std::uint64_t t = server.round;
  const std::size_t k = clients.size();
  if (alpha.size() != k || server.stack.clients() != k) throw Error("run_round: inconsistent client count");

  double server_ms = 0.0;
  auto server_start = Clock::now();

  const Matrix tracked = tracked_matrix(clients, server.tracked_dims);
  if (policy.needs_losses() && server.client_losses.size() != k) {
    server.client_losses = evaluate_global(server.theta_gl, clients, model).losses;
  }

  policies::RoundContext ctx;
  ctx.round = t;
  ctx.participants = options.participants;
  ctx.stack = &server.stack;
  ctx.tracked_params = &tracked;
  ctx.alpha = &alpha;
  ctx.client_losses = server.client_losses;
  CounterRng policy_rng = rng.split("policy").split(t);
  policies::SelectionDecision decision = policy.select(ctx, policy_rng);
  server_ms += elapsed_ms(server_start);

  // Local training from the broadcast model, in ascending client order.
  IndexSet order = decision.selected;
  std::sort(order.begin(), order.end());
  std::vector<std::pair<ClientId, ModelParams>> updates;
  updates.reserve(order.size());
  const CounterRng train_rng = rng.split("train").split(t);
  for (const ClientId j : order) {
    CounterRng client_rng = train_rng.split(static_cast<std::uint64_t>(j));
    updates.emplace_back(j, local_train(server.theta_gl, clients[j].data.train, model, trainer, client_rng));
  }

  server_start = Clock::now();
  // Conditional means: rho from the start-of-round tracked vectors.
  std::vector<IndexSet> blocks;
  std::vector<ClientId> representative;
  if (decision.partition) {
    blocks = decision.partition->blocks;
    representative = decision.selected;
  } else {
    blocks = implicit_blocks(tracked, decision.selected);
    representative = decision.selected;
  }
  const Matrix rho_inner = options.rho == RhoSource::normalized_inner_product
                               ? coalition::normalized_inner_products(tracked)
                               : Matrix();

  auto fresh_tracked = [&](ClientId j) -> Vector {
    for (const auto& [id, theta] : updates) {
      if (id == j) return track_subset(theta, server.tracked_dims);
    }
    throw Error("run_round: representative was not trained");
  };

  Matrix& means = server.stack.means();
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const ClientId j = representative[p];
    const Vector observed = fresh_tracked(j);
    for (const ClientId member : blocks[p]) {
      const auto row = static_cast<Eigen::Index>(member);
      if (member == j) {
        means.row(row) = observed.transpose();
        continue;
      }
      if (options.rho == RhoSource::normalized_inner_product) {
        means.row(row) = stats::conditional_mean_update(rho_inner(row, static_cast<Eigen::Index>(j)), observed).transpose();
      } else {
        for (std::size_t d = 0; d < server.tracked_dims.size(); ++d) {
          double r = 0.0;
          try {
            r = stats::pearson(server.stack.covariance(d), member, j);
          } catch (const ZeroDiagonal&) {
            r = 0.0;
          }
          means(row, static_cast<Eigen::Index>(d)) = r * observed(static_cast<Eigen::Index>(d));
        }
      }
    }
  }

  for (auto& [id, theta] : updates) clients[id].theta = theta;
  server.stack.observe(tracked_matrix(clients, server.tracked_dims), options.gamma);

  std::vector<std::size_t> counts(k);
  for (std::size_t i = 0; i < k; ++i) counts[i] = clients[i].samples();
  const ModelParams next = aggregate(updates, counts);
  server_ms += elapsed_ms(server_start);

  RoundMetrics m;
  m.round = t;
  m.update_norm = (next - server.theta_gl).norm() / trainer.learning_rate;
  server.theta_gl = next;

  const FederationEval eval = evaluate_global(server.theta_gl, clients, model);
  m.global_test_loss = eval.mean_loss;
  m.global_test_acc = eval.mean_acc;
  m.client_losses = eval.losses;
  server.client_losses = eval.losses;
  for (std::size_t i = 0; i < k; ++i) {
    m.global_train_loss += alpha[i] * model.evaluate(server.theta_gl, clients[i].data.train).loss;
  }

  m.selected = decision.selected;
  if (decision.partition) m.coalition_sizes = decision.partition->block_sizes();
  if (options.record_wall_clock) {
    m.wall_ms = elapsed_ms(round_start);
    m.server_ms = server_ms;
  }
  ++server.round;
  return m;
}

}  // namespace fedcvr::runtime

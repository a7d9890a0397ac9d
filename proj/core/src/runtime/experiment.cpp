#include "fedcvr/runtime/experiment.hpp"

#include <string>

#include "fedcvr/error.hpp"
#include "fedcvr/rng.hpp"

namespace fedcvr::runtime {

std::size_t TaskConfig::clients() const noexcept {
  return kind == Kind::regression ? regression.clients : classification.clients;
}

std::size_t TaskConfig::model_dim() const noexcept {
  return kind == Kind::regression ? regression.model_dim() : classification.model_dim();
}

void ExperimentConfig::validate() const {
  if (task.kind == TaskConfig::Kind::regression) {
    task.regression.validate();
  } else {
    task.classification.validate();
  }
  const std::size_t k = task.clients();
  if (rounds == 0) throw ConfigError("experiment.rounds must be >= 1");
  if (participants == 0 || participants > k) {
    throw ConfigError("experiment.participants must lie in [1, " + std::to_string(k) + "]");
  }
  if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  if (!(init_variance > 0.0)) throw ConfigError("covariance.init_variance must be > 0");
  if (gamma.kind == stats::GammaSchedule::Kind::constant &&
      !(gamma.constant_value > 0.0 && gamma.constant_value <= 1.0)) {
    throw ConfigError("covariance.gamma_value must lie in (0, 1]");
  }
  if (!(init_scale >= 0.0)) throw ConfigError("experiment.init_scale must be >= 0");
  if (tracked.subset_size == 0) throw ConfigError("tracked.subset_size must be >= 1");
  trainer.validate();
  policies::validate(policy, k, participants);
}

std::unique_ptr<tasks::Model> make_model(const TaskConfig& task) {
  if (task.kind == TaskConfig::Kind::regression) {
    return std::make_unique<tasks::LinearRegressionModel>(task.regression.model_dim());
  }
  return std::make_unique<tasks::SoftmaxRegressionModel>(task.classification.features(),
                                                         task.classification.classes);
}

tasks::GeneratedTask generate_task(const TaskConfig& task, std::uint64_t seed) {
  const std::uint64_t data_key = CounterRng(seed).split("data").key();
  if (task.kind == TaskConfig::Kind::regression) {
    auto task_cfg = task.regression;
    task_cfg.seed = data_key;
    return tasks::generate_synthetic_regression(task_cfg);
  }
  auto task_cfg = task.classification;
  task_cfg.seed = data_key;
  return tasks::generate_synthetic_classification(task_cfg);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const CounterRng root(seed);

  tasks::GeneratedTask data = generate_task(cfg.task, seed);
  const auto model = make_model(cfg.task);
  const std::size_t dim = model->param_dim();

  CounterRng init_rng = root.split("init");
  ModelParams theta0(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0(i) = cfg.init_scale * init_rng.normal();

  std::vector<ClientState> clients;
  clients.reserve(data.clients.size());
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k < data.clients.size(); ++k) {
    clients.push_back(ClientState{k, std::move(data.clients[k]), theta0});
    counts.push_back(clients.back().samples());
  }
  const auto alpha = stats::AggregationWeights::from_counts(counts);

  IndexSet tracked = choose_tracked_dims(dim, root.split("tracked"), cfg.tracked.full_threshold, cfg.tracked.subset_size);
  ServerState server{theta0, stats::CovarianceStack(clients.size(), tracked.size(), cfg.init_variance), 1,
                     std::move(tracked), {}};

  RoundOptions options;
  options.participants = cfg.participants;
  options.gamma = cfg.gamma;
  options.rho = cfg.rho;
  options.record_wall_clock = cfg.record_wall_clock;

  policies::Policy policy(cfg.policy);
  ExperimentResult result;
  result.planted = std::move(data.planted);
  result.trace.reserve(cfg.rounds > 0 ? cfg.rounds - 1 : 0);
  for (std::size_t t = 1; t < cfg.rounds; ++t) {
    result.trace.push_back(run_round(server, clients, policy, *model, alpha, cfg.trainer, options, root));
  }

  const FederationEval final_eval = evaluate_global(server.theta_gl, clients, *model);
  result.summary = {final_eval.mean_loss, final_eval.loss_std, final_eval.mean_acc, final_eval.acc_std};
  return result;
}

}  // namespace fedcvr::runtime

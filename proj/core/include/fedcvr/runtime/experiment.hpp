#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedcvr/policies/policy.hpp"
#include "fedcvr/runtime/round.hpp"
#include "fedcvr/runtime/trainer.hpp"
#include "fedcvr/stats/covariance_stack.hpp"
#include "fedcvr/tasks/synthetic.hpp"

namespace fedcvr::runtime {

struct TaskConfig {
  enum class Kind { regression, classification };

  Kind kind = Kind::regression;
  tasks::SyntheticRegressionConfig regression = tasks::SyntheticRegressionConfig::defaults(false);
  tasks::SyntheticClassificationConfig classification;

  std::size_t clients() const noexcept;
  std::size_t model_dim() const noexcept;
};

struct TrackedRule {
  std::size_t full_threshold = 512;
  std::size_t subset_size = 300;
};

struct ExperimentConfig {
  TaskConfig task;
  /// Total rounds T; the loop runs T - 1 rounds.
  std::size_t rounds = 100;
  std::size_t participants = 10;
  TrainerConfig trainer;
  policies::PolicyConfig policy = policies::FedCvrConfig{};
  double init_variance = 1.0;
  stats::GammaSchedule gamma;
  TrackedRule tracked;
  RhoSource rho = RhoSource::normalized_inner_product;
  double init_scale = 0.01;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";
  bool record_wall_clock = false;

  /// Throws ConfigError.
  void validate() const;
};

struct ExperimentSummary {
  double final_test_loss = 0.0;
  double final_test_loss_std = 0.0;
  double final_test_acc = 0.0;
  double final_test_acc_std = 0.0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> trace;
  ExperimentSummary summary;
  std::vector<std::size_t> planted;
};

/// The model the task trains.
std::unique_ptr<tasks::Model> make_model(const TaskConfig& task);

/// The federated datasets an experiment with this seed trains on.
tasks::GeneratedTask generate_task(const TaskConfig& task, std::uint64_t seed);

/// Generate data from the seed's "data" stream, initialize the global
/// model from its "init" stream, and run T - 1 rounds.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace fedcvr::runtime

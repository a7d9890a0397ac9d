#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <set>
#include <vector>

#include "fedcvr/error.hpp"
#include "fedcvr/runtime/experiment.hpp"
#include "fedcvr/runtime/round.hpp"
#include "fedcvr/runtime/trainer.hpp"
#include "fedcvr/tasks/models.hpp"

using namespace fedcvr;
using namespace fedcvr::runtime;

namespace {

struct Federation {
  std::vector<ClientState> clients;
  stats::AggregationWeights alpha = stats::AggregationWeights::uniform(1);
  ServerState server{ModelParams(), stats::CovarianceStack(1, 1), 1, {}, {}};
};

Federation make_federation(std::size_t k, std::uint64_t seed, bool intercept = false) {
  auto cfg = tasks::SyntheticRegressionConfig::defaults(intercept);
  cfg.clients = k;
  cfg.samples_per_client = 40 + 0 * seed;
  cfg.seed = seed;
  auto task = tasks::generate_synthetic_regression(cfg);
  Federation f;
  std::vector<std::size_t> counts;
  const ModelParams theta0 = ModelParams::Constant(static_cast<Eigen::Index>(cfg.model_dim()), 0.01);
  for (std::size_t i = 0; i < k; ++i) {
    f.clients.push_back(ClientState{i, std::move(task.clients[i]), theta0});
    counts.push_back(f.clients.back().samples());
  }
  f.alpha = stats::AggregationWeights::from_counts(counts);
  IndexSet tracked(cfg.model_dim());
  for (std::size_t d = 0; d < tracked.size(); ++d) tracked[d] = d;
  f.server = ServerState{theta0, stats::CovarianceStack(k, tracked.size(), 1.0), 1, tracked, {}};
  return f;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

bool same_metrics(const RoundMetrics& a, const RoundMetrics& b) {
  auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
  return a.round == b.round && same(a.global_test_loss, b.global_test_loss) &&
         same(a.global_test_acc, b.global_test_acc) && same(a.update_norm, b.update_norm) &&
         a.selected == b.selected && a.coalition_sizes == b.coalition_sizes && a.client_losses == b.client_losses;
}

ExperimentConfig small_experiment(policies::PolicyConfig policy) {
  ExperimentConfig cfg;
  cfg.task.regression.clients = 20;
  cfg.task.regression.samples_per_client = 30;
  cfg.rounds = 12;
  cfg.participants = 4;
  cfg.policy = std::move(policy);
  return cfg;
}

}  // namespace

TEST(LocalTrain, ZeroStepSizeAndZeroResidualKeepParameters) {
  const tasks::LinearRegressionModel model(1);
  tasks::Dataset d;
  d.x = Matrix::Constant(10, 1, 2.0);
  d.y = Vector::Constant(10, 6.0);
  TrainerConfig cfg;
  CounterRng rng(500);
  const ModelParams start = ModelParams::Constant(1, 0.3);
  TrainerConfig frozen = cfg;
  frozen.learning_rate = 0.0;
  EXPECT_TRUE(bitwise_equal(local_train(start, d, model, frozen, rng), start));
  const ModelParams truth = ModelParams::Constant(1, 3.0);
  EXPECT_TRUE(bitwise_equal(local_train(truth, d, model, cfg, rng), truth));
  EXPECT_THROW(TrainerConfig({0, 1, 0.1}).validate(), ConfigError);
}

TEST(LocalTrain, FullBatchStepsAreGradientDescent) {
  const tasks::LinearRegressionModel model(1);
  tasks::Dataset d;
  d.x = (Matrix(3, 1) << 1.0, 2.0, -1.0).finished();
  d.y = (Vector(3) << 1.0, 0.5, 2.0).finished();
  TrainerConfig cfg{3, 100, 0.05};
  CounterRng rng(501);
  ModelParams expected = ModelParams::Constant(1, 0.2);
  for (int s = 0; s < 3; ++s) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < 3; ++i) g += 2.0 * (expected(0) * d.x(i, 0) - d.y(i)) * d.x(i, 0) / 3.0;
    expected(0) -= 0.05 * g;
  }
  EXPECT_NEAR(local_train(ModelParams::Constant(1, 0.2), d, model, cfg, rng)(0), expected(0), 1e-14);
}

TEST(LocalTrain, DivergenceRaisesNonFiniteLoss) {
  const tasks::LinearRegressionModel model(1);
  tasks::Dataset d;
  d.x = Matrix::Constant(4, 1, 100.0);
  d.y = Vector::Constant(4, 1.0);
  CounterRng rng(502);
  EXPECT_THROW(local_train(ModelParams::Ones(1), d, model, {200, 4, 10.0}, rng), NonFiniteLoss);
}

TEST(Aggregate, Examples) {
  const std::vector<std::size_t> counts = {1, 2, 5};
  std::vector<std::pair<ClientId, ModelParams>> one = {{2, ModelParams::Constant(2, 4.0)}};
  EXPECT_TRUE(bitwise_equal(aggregate(one, counts), ModelParams::Constant(2, 4.0)));

  const std::vector<std::size_t> equal = {3, 3};
  std::vector<std::pair<ClientId, ModelParams>> two = {{1, ModelParams::Constant(1, 1.0)},
                                                      {0, ModelParams::Constant(1, 3.0)}};
  EXPECT_DOUBLE_EQ(aggregate(two, equal)(0), 2.0);

  std::vector<std::pair<ClientId, ModelParams>> weighted = {{0, ModelParams::Constant(1, 0.0)},
                                                           {1, ModelParams::Constant(1, 3.0)}};
  EXPECT_DOUBLE_EQ(aggregate(weighted, counts)(0), 2.0);
}

TEST(Aggregate, OrderIndependent) {
  CounterRng rng(503);
  std::vector<std::pair<ClientId, ModelParams>> ups;
  std::vector<std::size_t> counts(6);
  for (std::size_t i = 0; i < 6; ++i) {
    ModelParams p(3);
    for (Eigen::Index d = 0; d < 3; ++d) p(d) = rng.normal();
    ups.emplace_back(i, p);
    counts[i] = 1 + rng.uniform_index(50);
  }
  const ModelParams forward = aggregate(ups, counts);
  std::reverse(ups.begin(), ups.end());
  EXPECT_TRUE(bitwise_equal(forward, aggregate(ups, counts)));
}

TEST(Tracking, SubsetAndRule) {
  const ModelParams theta = (ModelParams(3) << 5, 7, 9).finished();
  EXPECT_EQ(track_subset(theta, {2})(0), 9.0);
  EXPECT_TRUE(bitwise_equal(track_subset(theta, {0, 1, 2}), theta));
  const auto all = choose_tracked_dims(100, CounterRng(1));
  EXPECT_EQ(all.size(), 100u);
  const auto sub = choose_tracked_dims(5000, CounterRng(1));
  EXPECT_EQ(sub.size(), 300u);
  EXPECT_TRUE(std::is_sorted(sub.begin(), sub.end()));
  EXPECT_EQ(std::set<std::size_t>(sub.begin(), sub.end()).size(), 300u);
  EXPECT_LT(sub.back(), 5000u);
  EXPECT_EQ(sub, choose_tracked_dims(5000, CounterRng(1)));
}

TEST(Round, FullParticipationSingleStepIsCentralizedGradientDescent) {
  auto f = make_federation(6, 510, true);
  const tasks::LinearRegressionModel model(2);
  const TrainerConfig trainer{1, 1000, 0.01};
  RoundOptions options;
  options.participants = 6;
  policies::Policy policy(policies::UniformConfig{});

  // Oracle: theta - eta * sum_k (n_k / n) grad L_k(theta).
  const ModelParams theta = f.server.theta_gl;
  ModelParams grad = ModelParams::Zero(2);
  double n = 0.0;
  for (const auto& c : f.clients) n += static_cast<double>(c.samples());
  for (const auto& c : f.clients) {
    const Matrix& x = c.data.train.x;
    Vector r = x * theta - c.data.train.y;
    grad += (static_cast<double>(c.samples()) / n) * (2.0 / static_cast<double>(x.rows())) * (x.transpose() * r);
  }
  const ModelParams expected = theta - 0.01 * grad;

  run_round(f.server, f.clients, policy, model, f.alpha, trainer, options, CounterRng(1));
  EXPECT_LT((f.server.theta_gl - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Round, WarmupRecordsNoPartitionAndUnobservedStayPut) {
  auto f = make_federation(12, 511);
  const tasks::LinearRegressionModel model(1);
  RoundOptions options;
  options.participants = 3;
  policies::Policy policy(policies::FedCvrConfig{});
  std::vector<ModelParams> before;
  for (const auto& c : f.clients) before.push_back(c.theta);
  const auto m = run_round(f.server, f.clients, policy, model, f.alpha, TrainerConfig{}, options, CounterRng(2));
  EXPECT_TRUE(m.coalition_sizes.empty());
  EXPECT_EQ(m.selected.size(), 3u);
  for (std::size_t k = 0; k < 12; ++k) {
    const bool chosen = std::find(m.selected.begin(), m.selected.end(), k) != m.selected.end();
    if (!chosen) EXPECT_TRUE(bitwise_equal(f.clients[k].theta, before[k]));
  }
  EXPECT_EQ(f.server.round, 2u);
}

TEST(Round, AfterWarmupCoalitionSizesCoverFederation) {
  auto f = make_federation(15, 512);
  const tasks::LinearRegressionModel model(1);
  RoundOptions options;
  options.participants = 3;
  policies::FedCvrConfig cfg;
  cfg.warmup_rounds = 2;
  policies::Policy policy(cfg);
  for (int t = 0; t < 6; ++t) {
    const auto m = run_round(f.server, f.clients, policy, model, f.alpha, TrainerConfig{}, options, CounterRng(3));
    EXPECT_EQ(f.server.theta_gl.size(), 1);
    EXPECT_EQ(std::set<ClientId>(m.selected.begin(), m.selected.end()).size(), 3u);
    if (m.round > 2) {
      std::size_t total = 0;
      for (auto s : m.coalition_sizes) total += s;
      EXPECT_EQ(total, 15u);
    }
  }
}

TEST(Round, DeterministicAcrossRuns) {
  std::vector<RoundMetrics> a;
  std::vector<RoundMetrics> b;
  for (auto* out : {&a, &b}) {
    auto f = make_federation(10, 513);
    const tasks::LinearRegressionModel model(1);
    RoundOptions options;
    options.participants = 3;
    policies::FedCvrConfig cfg;
    cfg.warmup_rounds = 1;
    policies::Policy policy(cfg);
    for (int t = 0; t < 5; ++t) {
      out->push_back(run_round(f.server, f.clients, policy, model, f.alpha, TrainerConfig{}, options, CounterRng(4)));
    }
  }
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_metrics(a[i], b[i]));
}

TEST(RoundProperty, FullParticipationTrainingLossNonIncreasing) {
  auto f = make_federation(8, 514);
  const tasks::LinearRegressionModel model(1);
  RoundOptions options;
  options.participants = 8;
  policies::Policy policy(policies::UniformConfig{});
  double previous = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 30; ++t) {
    const auto m = run_round(f.server, f.clients, policy, model, f.alpha, TrainerConfig{10, 100, 0.001}, options,
                             CounterRng(5));
    EXPECT_LE(m.global_train_loss, previous + 1e-12) << "round " << m.round;
    previous = m.global_train_loss;
  }
}

TEST(Experiment, SingleRoundGivesEmptyTraceAndInitialEvaluation) {
  auto cfg = small_experiment(policies::UniformConfig{});
  cfg.rounds = 1;
  const auto r = run_experiment(cfg, 7);
  EXPECT_TRUE(r.trace.empty());
  const auto task = generate_task(cfg.task, 7);
  CounterRng init = CounterRng(7).split("init");
  ModelParams theta0(1);
  theta0(0) = cfg.init_scale * init.normal();
  const tasks::LinearRegressionModel model(1);
  double mean = 0.0;
  for (const auto& c : task.clients) mean += model.evaluate(theta0, c.test).loss;
  EXPECT_NEAR(r.summary.final_test_loss, mean / 20.0, 1e-12);
}

TEST(Experiment, TraceLengthAndFinalMatchesSummary) {
  const auto cfg = small_experiment(policies::FedCvrConfig{1.0, 3, {}, false, 300});
  const auto r = run_experiment(cfg, 8);
  ASSERT_EQ(r.trace.size(), 11u);
  EXPECT_EQ(r.trace.back().global_test_loss, r.summary.final_test_loss);
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(r.trace[i].round, i + 1);
}

TEST(Experiment, DataDoesNotDependOnPolicy) {
  const auto a = small_experiment(policies::UniformConfig{});
  const auto b = small_experiment(policies::ActiveFlConfig{});
  const auto ta = generate_task(a.task, 9);
  const auto tb = generate_task(b.task, 9);
  for (std::size_t k = 0; k < ta.clients.size(); ++k) {
    EXPECT_TRUE(bitwise_equal(ta.clients[k].train.y, tb.clients[k].train.y));
  }
}

TEST(Experiment, ValidationCatchesBadBudgets) {
  auto cfg = small_experiment(policies::UniformConfig{});
  cfg.participants = 21;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_experiment(policies::UniformConfig{});
  cfg.seeds.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_experiment(policies::UniformConfig{});
  cfg.rounds = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Experiment, ClassificationRunsAndReportsAccuracy) {
  ExperimentConfig cfg;
  cfg.task.kind = TaskConfig::Kind::classification;
  cfg.task.classification.clients = 10;
  cfg.task.classification.classes = 3;
  cfg.rounds = 15;
  cfg.participants = 3;
  cfg.trainer = {3, 20, 0.1};
  cfg.policy = policies::FedCvrConfig{1.0, 4, {}, false, 300};
  const auto r = run_experiment(cfg, 1);
  EXPECT_GT(r.summary.final_test_acc, 1.0 / 3.0);
  EXPECT_LE(r.summary.final_test_acc, 1.0);
}

#include "fedcvr/tasks/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedcvr/error.hpp"
#include "fedcvr/rng.hpp"

namespace fedcvr::tasks {

SyntheticRegressionConfig SyntheticRegressionConfig::defaults(bool intercept, bool iid) {
  SyntheticRegressionConfig cfg;
  cfg.intercept = intercept;
  cfg.clusters = iid ? 1 : 2;
  RegressionCluster first;
  first.input_mean = Vector::Constant(1, 1.0);
  first.input_std = 1.0;
  first.theta_std = 0.5;
  RegressionCluster second;
  second.input_mean = Vector::Constant(1, 3.0);
  second.input_std = 1.0;
  second.theta_std = 0.5;
  if (intercept) {
    first.theta_mean = (Vector(2) << 2.0, 1.0).finished();
    second.theta_mean = (Vector(2) << -2.0, -1.0).finished();
  } else {
    first.theta_mean = Vector::Constant(1, 2.0);
    second.theta_mean = Vector::Constant(1, -2.0);
  }
  cfg.cluster_params = {first};
  if (!iid) cfg.cluster_params.push_back(second);
  return cfg;
}

void SyntheticRegressionConfig::validate() const {
  if (clusters == 0) throw ConfigError("regression: clusters must be >= 1");
  if (clients == 0) throw ConfigError("regression: clients must be >= 1");
  if (samples_per_client < 2) throw ConfigError("regression: need at least 2 samples per client");
  if (input_dim == 0) throw ConfigError("regression: input_dim must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("regression: train_fraction must lie in (0, 1)");
  }
  if (cluster_params.size() != clusters) {
    throw ConfigError("regression: expected " + std::to_string(clusters) + " cluster parameter sets, got " +
                      std::to_string(cluster_params.size()));
  }
  for (const auto& c : cluster_params) {
    if (static_cast<std::size_t>(c.input_mean.size()) != input_dim) {
      throw ConfigError("regression: cluster input mean has the wrong length");
    }
    if (static_cast<std::size_t>(c.theta_mean.size()) != model_dim()) {
      throw ConfigError("regression: cluster theta mean has the wrong length");
    }
    if (!(c.input_std >= 0.0) || !(c.theta_std >= 0.0)) {
      throw ConfigError("regression: standard deviations must be non-negative");
    }
  }
}

namespace {

std::size_t train_count(std::size_t n, double fraction) {
  const auto t = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(t, 1, n - 1);
}

Dataset take_rows(const Dataset& all, std::span<const std::size_t> rows) {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.x.resize(m, all.x.cols());
  out.y.resize(m);
  if (all.latent.size() > 0) out.latent.resize(m, all.latent.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    out.x.row(r) = all.x.row(src);
    out.y(r) = all.y(src);
    if (all.latent.size() > 0) out.latent.row(r) = all.latent.row(src);
  }
  return out;
}

ClientData split(const Dataset& all, double fraction, CounterRng& rng) {
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  const std::size_t n_train = train_count(order.size(), fraction);
  ClientData out;
  out.train = take_rows(all, std::span<const std::size_t>(order).first(n_train));
  out.test = take_rows(all, std::span<const std::size_t>(order).subspan(n_train));
  return out;
}

}  // namespace

GeneratedTask generate_synthetic_regression(const SyntheticRegressionConfig& cfg) {
  cfg.validate();
  const CounterRng root = CounterRng(cfg.seed).split("regression");
  const auto n = static_cast<Eigen::Index>(cfg.samples_per_client);
  const auto in_dim = static_cast<Eigen::Index>(cfg.input_dim);
  const auto dim = static_cast<Eigen::Index>(cfg.model_dim());

  GeneratedTask out;
  out.clients.reserve(cfg.clients);
  out.planted.reserve(cfg.clients);
  for (std::size_t k = 0; k < cfg.clients; ++k) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(k));
    const auto cluster = static_cast<std::size_t>(rng.uniform_index(cfg.clusters));
    const RegressionCluster& params = cfg.cluster_params[cluster];

    Dataset all;
    all.x.resize(n, dim);
    all.y.resize(n);
    Matrix latents(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index d = 0; d < in_dim; ++d) all.x(i, d) = rng.normal(params.input_mean(d), params.input_std);
      if (cfg.intercept) all.x(i, in_dim) = 1.0;
      for (Eigen::Index d = 0; d < dim; ++d) latents(i, d) = rng.normal(params.theta_mean(d), params.theta_std);
      all.y(i) = latents.row(i).dot(all.x.row(i));
    }
    if (cfg.keep_latents) all.latent = std::move(latents);

    CounterRng split_rng = rng.split("split");
    out.clients.push_back(split(all, cfg.train_fraction, split_rng));
    out.planted.push_back(cluster);
  }
  return out;
}

void SyntheticClassificationConfig::validate() const {
  if (classes < 2) throw ConfigError("classification: classes must be >= 2");
  if (clusters == 0 || clients == 0 || input_dim == 0) {
    throw ConfigError("classification: clusters, clients and input_dim must be >= 1");
  }
  if (samples_per_client < 2) throw ConfigError("classification: need at least 2 samples per client");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("classification: train_fraction must lie in (0, 1)");
  }
  if (!(separation >= 0.0) || !(skew > 0.0)) {
    throw ConfigError("classification: separation must be >= 0 and skew > 0");
  }
}

namespace {

// Class directions: +-e_0, +-e_1, ... while axes last, then seeded random
// unit vectors.
Matrix class_directions(const SyntheticClassificationConfig& cfg, CounterRng rng) {
  const auto c = static_cast<Eigen::Index>(cfg.classes);
  const auto d = static_cast<Eigen::Index>(cfg.input_dim);
  Matrix dirs = Matrix::Zero(c, d);
  for (Eigen::Index i = 0; i < c; ++i) {
    if (i < 2 * d) {
      dirs(i, i / 2) = (i % 2 == 0) ? 1.0 : -1.0;
      continue;
    }
    for (Eigen::Index j = 0; j < d; ++j) dirs(i, j) = rng.normal();
    const double norm = dirs.row(i).norm();
    if (norm > 0.0) {
      dirs.row(i) /= norm;
    } else {
      dirs(i, 0) = 1.0;
    }
  }
  return dirs;
}

}  // namespace

GeneratedTask generate_synthetic_classification(const SyntheticClassificationConfig& cfg) {
  cfg.validate();
  const CounterRng root = CounterRng(cfg.seed).split("classification");
  const Matrix means = 0.5 * cfg.separation * class_directions(cfg, root.split("directions"));
  const auto n = static_cast<Eigen::Index>(cfg.samples_per_client);
  const auto in_dim = static_cast<Eigen::Index>(cfg.input_dim);

  GeneratedTask out;
  out.clients.reserve(cfg.clients);
  for (std::size_t k = 0; k < cfg.clients; ++k) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(k));
    const auto cluster = static_cast<std::size_t>(rng.uniform_index(cfg.clusters));
    std::vector<double> prior(cfg.classes);
    for (std::size_t c = 0; c < cfg.classes; ++c) prior[c] = (c % cfg.clusters == cluster) ? cfg.skew : 1.0;

    Dataset all;
    all.x.resize(n, in_dim + 1);
    all.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(sample_categorical(prior, rng));
      for (Eigen::Index d = 0; d < in_dim; ++d) all.x(i, d) = means(c, d) + rng.normal();
      all.x(i, in_dim) = 1.0;
      all.y(i) = static_cast<double>(c);
    }
    CounterRng split_rng = rng.split("split");
    out.clients.push_back(split(all, cfg.train_fraction, split_rng));
    out.planted.push_back(cluster);
  }
  return out;
}

}  // namespace fedcvr::tasks

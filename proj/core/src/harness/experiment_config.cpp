#include "fedcvr/harness/experiment_config.hpp"

#include <string>

#include "fedcvr/error.hpp"

namespace fedcvr::harness {

namespace {

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

tasks::SyntheticRegressionConfig regression_from_config(const Config& cfg) {
  const bool intercept = cfg.get_bool("task.intercept", false);
  const std::size_t clusters = cfg.get_size("task.clusters", 2);
  auto out = tasks::SyntheticRegressionConfig::defaults(intercept, clusters == 1);
  out.clusters = clusters;
  out.clients = cfg.get_size("task.clients", out.clients);
  out.samples_per_client = cfg.get_size("task.samples_per_client", out.samples_per_client);
  out.input_dim = cfg.get_size("task.input_dim", out.input_dim);
  out.train_fraction = cfg.get_double("task.train_fraction", out.train_fraction);
  out.keep_latents = cfg.get_bool("task.keep_latents", false);

  // Defaults only describe one-dimensional inputs; any other shape must be
  // spelled out per cluster.
  const bool defaults_fit = out.input_dim == 1 && out.cluster_params.size() == clusters;
  if (!defaults_fit) out.cluster_params.assign(clusters, tasks::RegressionCluster{});
  for (std::size_t j = 0; j < clusters; ++j) {
    const std::string pre = "task.cluster." + std::to_string(j) + ".";
    auto& c = out.cluster_params[j];
    c.input_mean = to_vector(cfg.get_doubles(pre + "input_mean", from_vector(c.input_mean)));
    c.input_std = cfg.get_double(pre + "input_std", c.input_std);
    c.theta_mean = to_vector(cfg.get_doubles(pre + "theta_mean", from_vector(c.theta_mean)));
    c.theta_std = cfg.get_double(pre + "theta_std", c.theta_std);
  }
  return out;
}

tasks::SyntheticClassificationConfig classification_from_config(const Config& cfg) {
  tasks::SyntheticClassificationConfig out;
  out.clusters = cfg.get_size("task.clusters", out.clusters);
  out.clients = cfg.get_size("task.clients", out.clients);
  out.samples_per_client = cfg.get_size("task.samples_per_client", out.samples_per_client);
  out.input_dim = cfg.get_size("task.input_dim", out.input_dim);
  out.classes = cfg.get_size("task.classes", out.classes);
  out.separation = cfg.get_double("task.separation", out.separation);
  out.skew = cfg.get_double("task.skew", out.skew);
  out.train_fraction = cfg.get_double("task.train_fraction", out.train_fraction);
  return out;
}

}  // namespace

policies::PolicyConfig policy_from_config(const Config& cfg) {
  // Every knob is parsed so that a matrix sharing one [policy] section
  // across variants is type-checked and does not trip the unknown-key check.
  const std::string variant = cfg.get_string("policy.variant", "fedcvr_bolt");

  policies::PowerOfChoiceConfig poc;
  poc.candidates = cfg.get_size("policy.candidates", poc.candidates);

  policies::ActiveFlConfig afl;
  afl.alpha1 = cfg.get_double("policy.alpha1", afl.alpha1);
  afl.alpha2 = cfg.get_double("policy.alpha2", afl.alpha2);
  afl.alpha3 = cfg.get_double("policy.alpha3", afl.alpha3);

  policies::FedCvrConfig cvr;
  cvr.beta = cfg.get_double("policy.beta", cvr.beta);
  cvr.warmup_rounds = cfg.get_size("policy.warmup_rounds", cvr.warmup_rounds);
  cvr.use_argmax = cfg.get_bool("policy.use_argmax", cvr.use_argmax);
  cvr.kmeans_iters = cfg.get_size("policy.kmeans_iters", cvr.kmeans_iters);
  const std::string kernel = cfg.get_string("policy.kernel", "rbf");
  try {
    cvr.kernel.kind = coalition::parse_kernel_kind(kernel);
  } catch (const Error&) {
    throw ConfigError(cfg.where("policy.kernel") + ": key 'policy.kernel' has unknown kernel '" + kernel + "'");
  }
  cvr.kernel.gamma = cfg.get_double("policy.kernel_gamma", cvr.kernel.gamma);
  cvr.kernel.sigmoid_offset = cfg.get_double("policy.sigmoid_offset", cvr.kernel.sigmoid_offset);

  if (variant == "uniform" || variant == "fedavg") return policies::UniformConfig{};
  if (variant == "power_of_choice") return poc;
  if (variant == "active_fl") return afl;
  if (variant == "fedcvr_bolt" || variant == "fedcvr") return cvr;
  throw ConfigError(cfg.where("policy.variant") + ": key 'policy.variant' has unknown policy '" + variant + "'");
}

runtime::ExperimentConfig experiment_from_config(const Config& cfg) {
  runtime::ExperimentConfig out;

  const std::string kind = cfg.get_string("task.kind", "regression");
  if (kind == "regression") {
    out.task.kind = runtime::TaskConfig::Kind::regression;
    out.task.regression = regression_from_config(cfg);
  } else if (kind == "classification") {
    out.task.kind = runtime::TaskConfig::Kind::classification;
    out.task.classification = classification_from_config(cfg);
  } else {
    throw ConfigError(cfg.where("task.kind") + ": key 'task.kind' has unknown task '" + kind + "'");
  }

  out.rounds = cfg.get_size("experiment.rounds", out.rounds);
  out.participants = cfg.get_size("experiment.participants", out.participants);
  out.seeds = cfg.get_u64s("experiment.seeds", out.seeds);
  out.init_scale = cfg.get_double("experiment.init_scale", out.init_scale);

  out.trainer.local_steps = cfg.get_size("trainer.local_steps", out.trainer.local_steps);
  out.trainer.batch_size = cfg.get_size("trainer.batch_size", out.trainer.batch_size);
  out.trainer.learning_rate = cfg.get_double("trainer.eta", out.trainer.learning_rate);

  out.policy = policy_from_config(cfg);

  out.init_variance = cfg.get_double("covariance.init_variance", out.init_variance);
  const std::string gamma = cfg.get_string("covariance.gamma", "reciprocal");
  if (gamma == "reciprocal") {
    out.gamma.kind = stats::GammaSchedule::Kind::reciprocal;
  } else if (gamma == "constant") {
    out.gamma.kind = stats::GammaSchedule::Kind::constant;
  } else {
    throw ConfigError(cfg.where("covariance.gamma") + ": key 'covariance.gamma' expects reciprocal or constant");
  }
  out.gamma.constant_value = cfg.get_double("covariance.gamma_value", out.gamma.constant_value);
  const std::string rho = cfg.get_string("covariance.rho", "inner_product");
  if (rho == "inner_product") {
    out.rho = runtime::RhoSource::normalized_inner_product;
  } else if (rho == "pearson") {
    out.rho = runtime::RhoSource::pearson;
  } else {
    throw ConfigError(cfg.where("covariance.rho") + ": key 'covariance.rho' expects inner_product or pearson");
  }

  out.tracked.full_threshold = cfg.get_size("tracked.full_threshold", out.tracked.full_threshold);
  out.tracked.subset_size = cfg.get_size("tracked.subset_size", out.tracked.subset_size);

  out.output_dir = cfg.get_string("output.dir", out.output_dir);
  out.record_wall_clock = cfg.get_bool("output.record_wall_clock", out.record_wall_clock);

  cfg.reject_unused({"matrix.", "setting."});

  try {
    out.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  return out;
}

}  // namespace fedcvr::harness

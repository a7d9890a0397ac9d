#pragma once

#include "fedcvr/harness/config.hpp"
#include "fedcvr/runtime/experiment.hpp"

namespace fedcvr::harness {

/// Build and validate an experiment from the keys under task., experiment.,
/// trainer., policy., covariance., tracked. and output.; unknown keys in
/// those sections are rejected. Throws ConfigError.
runtime::ExperimentConfig experiment_from_config(const Config& cfg);

/// Parse a policy from policy.variant and the policy.* knobs.
policies::PolicyConfig policy_from_config(const Config& cfg);

}  // namespace fedcvr::harness

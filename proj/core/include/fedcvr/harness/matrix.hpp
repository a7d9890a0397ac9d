#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "fedcvr/harness/config.hpp"
#include "fedcvr/harness/csv.hpp"
#include "fedcvr/runtime/experiment.hpp"

namespace fedcvr::harness {

/// One (setting, policy) pair; its seeds come from config.seeds.
struct MatrixCell {
  std::string setting;
  std::string policy;
  runtime::ExperimentConfig config;
};

/// Expand a matrix config:
///   matrix.settings = iid, noniid      (default: one setting named "default")
///   matrix.policies = uniform, fedcvr_bolt   (default: policy.variant)
///   setting.<name>.<key> = value       overrides <key> for that setting
/// Cells are ordered by setting, then policy, as listed.
std::vector<MatrixCell> matrix_from_config(const Config& cfg);

/// Trace file name for one run.
std::string trace_file_name(const std::string& setting, const std::string& policy, std::uint64_t seed);

/// Thread cap from FEDCVR_THREADS, else the hardware concurrency.
std::size_t matrix_threads();

/// Run every (cell x seed), writing one trace per run and summary.csv into
/// `out_dir`. A failing run marks its cell's summary row and leaves the
/// others untouched. Output is independent of `threads`.
std::vector<SummaryRow> run_matrix(const std::vector<MatrixCell>& cells, const std::filesystem::path& out_dir,
                                   std::size_t threads);

}  // namespace fedcvr::harness

#include "fedcvr/harness/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string_view>
#include <thread>

#include "fedcvr/error.hpp"
#include "fedcvr/harness/experiment_config.hpp"

namespace fedcvr::harness {

namespace {

struct RunOutcome {
  bool ok = false;
  double final_loss = 0.0;
  double final_acc = 0.0;
  std::string error;
};

}  // namespace

std::vector<MatrixCell> matrix_from_config(const Config& cfg) {
  const auto settings = cfg.get_list("matrix.settings", {"default"});
  if (settings.empty()) throw ConfigError(cfg.where("matrix.settings") + ": key 'matrix.settings' is empty");
  const bool explicit_policies = cfg.has("matrix.policies");
  const auto policy_names = cfg.get_list("matrix.policies", {});
  if (explicit_policies && policy_names.empty()) {
    throw ConfigError(cfg.where("matrix.policies") + ": key 'matrix.policies' is empty");
  }

  std::vector<MatrixCell> cells;
  for (const auto& setting : settings) {
    const Config base = cfg.overlay("setting." + setting);
    const std::vector<std::string> names =
        explicit_policies ? policy_names : std::vector<std::string>{base.get_string("policy.variant", "fedcvr_bolt")};
    for (const auto& name : names) {
      Config cell_cfg = base;
      cell_cfg.set("policy.variant", name);
      MatrixCell cell;
      cell.setting = setting;
      cell.config = experiment_from_config(cell_cfg);
      cell.policy = std::string(policies::variant_name(cell.config.policy));
      cell_cfg.reject_unused({"matrix.", "setting."});
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string trace_file_name(const std::string& setting, const std::string& policy, std::uint64_t seed) {
  return "trace_" + setting + "_" + policy + "_seed" + std::to_string(seed) + ".csv";
}

std::size_t matrix_threads() {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("FEDCVR_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return hw;
}

std::vector<SummaryRow> run_matrix(const std::vector<MatrixCell>& cells, const std::filesystem::path& out_dir,
                                   std::size_t threads) {
  struct Job {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const auto seed : cells[c].config.seeds) jobs.push_back({c, seed});
  }
  std::filesystem::create_directories(out_dir);

  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const auto& cell = cells[jobs[i].cell];
      try {
        const auto result = runtime::run_experiment(cell.config, jobs[i].seed);
        write_trace_file(out_dir / trace_file_name(cell.setting, cell.policy, jobs[i].seed), cell.policy,
                         jobs[i].seed, result.trace);
        outcomes[i] = {true, result.summary.final_test_loss, result.summary.final_test_acc, {}};
      } catch (const std::exception& e) {
        outcomes[i] = {false, 0.0, 0.0, e.what()};
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<SummaryRow> rows;
  std::size_t j = 0;
  for (const auto& cell : cells) {
    std::vector<double> losses;
    std::vector<double> accs;
    std::string first_error;
    std::size_t failures = 0;
    for (const auto seed : cell.config.seeds) {
      const auto& o = outcomes[j++];
      if (o.ok) {
        losses.push_back(o.final_loss);
        accs.push_back(o.final_acc);
      } else {
        if (failures++ == 0) first_error = "seed " + std::to_string(seed) + ": " + o.error;
      }
    }
    auto row = summarize(cell.setting, cell.policy, losses, accs, cell.config.seeds.size());
    if (failures) row.status = "FAILED " + std::to_string(failures) + " runs; " + first_error;
    rows.push_back(std::move(row));
  }
  write_summary_file(out_dir / "summary.csv", rows);
  return rows;
}

}  // namespace fedcvr::harness

#include "fedcvr/harness/cli.hpp"

#include <CLI11.hpp>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedcvr/error.hpp"
#include "fedcvr/harness/config.hpp"
#include "fedcvr/harness/csv.hpp"
#include "fedcvr/harness/experiment_config.hpp"
#include "fedcvr/harness/matrix.hpp"
#include "fedcvr/harness/verify.hpp"

namespace fedcvr::harness {

namespace {

const std::vector<std::string> kMatrixPrefixes = {"matrix.", "setting."};

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out_dir,
            std::ostream& out) {
  const Config cfg = Config::load(config_path);
  MatrixCell cell;
  cell.setting = "default";
  cell.config = experiment_from_config(cfg);
  cell.policy = std::string(policies::variant_name(cell.config.policy));
  cfg.reject_unused(kMatrixPrefixes);
  if (seed) cell.config.seeds = {*seed};
  const std::string dir = out_dir.value_or(cell.config.output_dir);

  const auto rows = run_matrix({cell}, dir, 1);
  write_summary(out, rows);
  return rows.front().status == "ok" ? kExitOk : kExitRuntimeError;
}

int cmd_matrix(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  const Config cfg = Config::load(config_path);
  const auto cells = matrix_from_config(cfg);
  const auto rows = run_matrix(cells, out_dir, matrix_threads());
  write_summary(out, rows);
  for (const auto& r : rows) {
    if (r.status != "ok") return kExitRuntimeError;
  }
  return kExitOk;
}

int cmd_gen_data(const std::string& config_path, const std::string& out_path, std::ostream& out) {
  const Config cfg = Config::load(config_path);
  const auto exp = experiment_from_config(cfg);
  cfg.reject_unused(kMatrixPrefixes);
  const auto task = runtime::generate_task(exp.task, exp.seeds.front());
  const std::filesystem::path path(out_path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + out_path + "'");
  tasks::write_datasets_csv(file, task.clients);
  if (!file) throw Error("failed writing '" + out_path + "'");
  out << "wrote " << task.clients.size() << " clients to " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated client selection by coalitional variance reduction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> run_out;

  auto* run = app.add_subcommand("run", "Run one experiment for each configured seed");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--seed", seed, "Run only this seed");
  run->add_option("--out", run_out, "Output directory (default: output.dir)");

  auto* matrix = app.add_subcommand("matrix", "Run every (setting, policy, seed) cell");
  matrix->add_option("--config", config_path, "Config file")->required();
  matrix->add_option("--out", out_path, "Output directory")->required();

  auto* gen = app.add_subcommand("gen-data", "Write the generated federated dataset as CSV");
  gen->add_option("--config", config_path, "Config file")->required();
  gen->add_option("--out", out_path, "Output CSV path")->required();

  auto* verify = app.add_subcommand("verify", "Run the built-in numerical self checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed, run_out, out);
    if (matrix->parsed()) return cmd_matrix(config_path, out_path, out);
    if (gen->parsed()) return cmd_gen_data(config_path, out_path, out);
    if (verify->parsed()) return report_verify(run_verify_suite(), out) ? kExitOk : kExitRuntimeError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace fedcvr::harness

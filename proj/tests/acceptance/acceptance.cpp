// Acceptance suite. Each criterion prints one PASS/FAIL line; with
// --criterion N only that one runs. Exit status is nonzero if any ran
// criterion failed.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fedcvr/coalition/partition.hpp"
#include "fedcvr/harness/config.hpp"
#include "fedcvr/harness/matrix.hpp"
#include "fedcvr/policies/policy.hpp"
#include "fedcvr/runtime/experiment.hpp"
#include "fedcvr/stats/variance_reduction.hpp"
#include "oracles.hpp"

using namespace fedcvr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

harness::Config shipped_config(const std::string& name) {
  return harness::Config::load(fs::path(FEDCVR_SOURCE_DIR) / "configs" / name);
}

// Experiments of the shipped matrix, keyed by (setting, policy).
std::map<std::pair<std::string, std::string>, runtime::ExperimentConfig> shipped_cells() {
  std::map<std::pair<std::string, std::string>, runtime::ExperimentConfig> out;
  for (auto& cell : harness::matrix_from_config(shipped_config("matrix.conf"))) {
    out[{cell.setting, cell.policy}] = cell.config;
  }
  return out;
}

std::size_t thread_count() { return std::max<std::size_t>(1, harness::matrix_threads()); }

// Run every (config, seed) pair and return the results in job order.
std::vector<runtime::ExperimentResult> run_all(const std::vector<runtime::ExperimentConfig>& cfgs) {
  std::vector<std::pair<std::size_t, std::uint64_t>> jobs;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    for (auto s : cfgs[c].seeds) jobs.emplace_back(c, s);
  }
  std::vector<runtime::ExperimentResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      results[j] = runtime::run_experiment(cfgs[jobs[j].first], jobs[j].second);
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(thread_count(), jobs.size()); ++t) pool.emplace_back(worker);
  pool.clear();
  return results;
}

double mean_final_loss(const std::vector<runtime::ExperimentResult>& rs, std::size_t first, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = first; i < first + count; ++i) s += rs[i].summary.final_test_loss;
  return s / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  const auto start = Clock::now();
  CounterRng rng(0xACCE001);
  double worst = 0.0;
  std::size_t failures = 0;
  for (int inst = 0; inst < 200; ++inst) {
    CounterRng r = rng.split("instance").split(static_cast<std::uint64_t>(inst));
    const std::size_t k = 2 + r.uniform_index(5);
    const Matrix c = oracle::factor_spd(k, r);
    const Vector a = oracle::simplex(k, r);
    IndexSet subset;
    while (subset.empty()) {
      subset.clear();
      for (std::size_t i = 0; i < k; ++i) {
        if (r.uniform() < 0.5) subset.push_back(i);
      }
    }
    const double formula = stats::variance_reduction_subset(c, stats::AggregationWeights(a), subset);
    CounterRng mc = r.split("mc");
    const double oracle = oracle::streaming_explained_variance(c, a, subset, 1'000'000, mc);
    const double err = oracle::relative_error(formula, oracle);
    worst = std::max(worst, err);
    if (err >= 0.02) ++failures;
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 120.0,
          "200 instances, worst relative error " + fmt("%.4f", worst) + ", " + std::to_string(failures) +
              " above 2%, " + fmt("%.1f s", secs)};
}

Outcome criterion_2() {
  const auto start = Clock::now();
  CounterRng rng(0xACCE002);
  double worst = 0.0;
  for (int inst = 0; inst < 10'000; ++inst) {
    const std::size_t k = 2 + rng.uniform_index(7);
    const Matrix c = (inst % 2) ? oracle::wishart_spd(k, rng) : oracle::factor_spd(k, rng);
    const stats::AggregationWeights a(oracle::simplex(k, rng));
    const Vector v = stats::value_vector_component(c, a);
    for (std::size_t i = 0; i < k; ++i) {
      const double s = stats::variance_reduction_subset(c, a, {i});
      worst = std::max(worst, std::abs(s - v(static_cast<Eigen::Index>(i))) /
                                  std::max(1.0, std::abs(v(static_cast<Eigen::Index>(i)))));
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-10 && secs < 5.0, "max |A|=1 discrepancy " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs)};
}

Outcome criterion_3() {
  const auto start = Clock::now();
  CounterRng rng(0xACCE003);
  const stats::GammaSchedule schedule;
  Matrix c = Matrix::Identity(4, 4) * 3.0;
  Matrix sum = Matrix::Zero(4, 4);
  const Vector zero = Vector::Zero(4);
  for (std::uint64_t t = 1; t <= 1000; ++t) {
    Vector dev(4);
    for (Eigen::Index i = 0; i < 4; ++i) dev(i) = rng.normal() * (1.0 + static_cast<double>(i));
    c = stats::robbins_monro_update(c, schedule.at(t), dev, zero);
    sum += dev * dev.transpose();
  }
  const double err = (c - sum / 1000.0).cwiseAbs().maxCoeff();
  const double secs = seconds_since(start);
  return {err <= 1e-9 && secs < 1.0, "max deviation from batch mean " + fmt("%.3g", err) + ", " + fmt("%.3f s", secs)};
}

Outcome criterion_4() {
  const auto start = Clock::now();
  constexpr std::size_t k = 20;
  constexpr Eigen::Index dims = 2;
  const double separation = 10.0;
  const double spread = 0.2;
  std::size_t perfect = 0;
  std::string first_miss;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CounterRng rng = CounterRng(seed).split("planted");
    Vector dir(dims);
    for (Eigen::Index i = 0; i < dims; ++i) dir(i) = rng.normal();
    dir.normalize();
    std::vector<std::size_t> truth(k);
    Matrix params(static_cast<Eigen::Index>(k), dims);
    for (std::size_t i = 0; i < k; ++i) {
      truth[i] = i < 2 ? i : rng.uniform_index(2);
      const double sign = truth[i] ? 0.5 : -0.5;
      for (Eigen::Index d = 0; d < dims; ++d) {
        params(static_cast<Eigen::Index>(i), d) = sign * separation * dir(d) + spread * rng.normal();
      }
    }
    // Through the policy, after warm-up, with P = 2 coalitions.
    policies::FedCvrConfig cfg;
    cfg.warmup_rounds = 0;
    const stats::CovarianceStack stack(k, static_cast<std::size_t>(dims));
    const auto alpha = stats::AggregationWeights::uniform(k);
    CounterRng sel = rng.split("select");
    const auto decision = policies::select_fedcvr(stack, params, alpha, 1, cfg, 2, sel);
    const double ari = coalition::adjusted_rand_index(decision.partition->labels(), truth);
    if (ari == 1.0) {
      ++perfect;
    } else if (first_miss.empty()) {
      first_miss = ", first miss seed " + std::to_string(seed) + " ARI " + fmt("%.4f", ari);
    }
  }
  const double secs = seconds_since(start);
  return {perfect == 100 && secs < 30.0,
          std::to_string(perfect) + "/100 seeds with ARI = 1 (separation/spread = 50)" + first_miss + ", " +
              fmt("%.2f s", secs)};
}

Outcome criterion_5() {
  const auto start = Clock::now();
  CounterRng rng(0xACCE005);
  std::size_t bad_sum = 0;
  std::size_t bad_positive = 0;
  std::size_t bad_uniform = 0;
  std::size_t bad_shift = 0;
  std::size_t bad_argmax = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t k = 1 + rng.uniform_index(30);
    Vector v(static_cast<Eigen::Index>(k));
    const double scale = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = scale * rng.uniform();
    IndexSet members(k);
    std::iota(members.begin(), members.end(), 0);
    const double beta = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    const Vector p = policies::boltzmann_probs(v, members, beta);
    if (std::abs(p.sum() - 1.0) > 1e-12) ++bad_sum;
    if ((p.array() <= 0.0).any()) ++bad_positive;

    const Vector u = policies::boltzmann_probs(v, members, 0.0);
    if ((u.array() - 1.0 / static_cast<double>(k)).abs().maxCoeff() > 1e-12) ++bad_uniform;

    const Vector shifted = policies::boltzmann_probs((v.array() + -50.0 + 100.0 * rng.uniform()).matrix(), members, beta);
    if ((shifted - p).cwiseAbs().maxCoeff() > 1e-9) ++bad_shift;

    Eigen::Index arg_v = 0;
    v.maxCoeff(&arg_v);
    for (double b : {beta, 3.0 * beta, 0.1 * beta}) {
      Eigen::Index arg_p = 0;
      policies::boltzmann_probs(v, members, b).maxCoeff(&arg_p);
      if (arg_p != arg_v) {
        ++bad_argmax;
        break;
      }
    }
  }
  const double secs = seconds_since(start);
  const bool ok = bad_sum + bad_positive + bad_uniform + bad_shift + bad_argmax == 0 && secs < 5.0;
  return {ok, "violations: sum " + std::to_string(bad_sum) + ", positivity " + std::to_string(bad_positive) + ", beta=0 " + std::to_string(bad_uniform) +
                  ", shift " + std::to_string(bad_shift) + ", argmax " + std::to_string(bad_argmax) + " over 1000 vectors, " +
                  fmt("%.2f s", secs)};
}

// Uniform vs FedCVR-Bolt on one setting; returns the relative improvement.
struct Comparison {
  double uniform = 0.0;
  double fedcvr = 0.0;
  double improvement() const { return (uniform - fedcvr) / uniform; }
};

std::vector<Comparison> compare(const std::vector<runtime::ExperimentConfig>& fedcvr_cfgs,
                                const runtime::ExperimentConfig& uniform_cfg) {
  std::vector<runtime::ExperimentConfig> all = {uniform_cfg};
  all.insert(all.end(), fedcvr_cfgs.begin(), fedcvr_cfgs.end());
  const auto results = run_all(all);
  const std::size_t n = uniform_cfg.seeds.size();
  const double base = mean_final_loss(results, 0, n);
  std::vector<Comparison> out;
  std::size_t offset = n;
  for (const auto& cfg : fedcvr_cfgs) {
    out.push_back({base, mean_final_loss(results, offset, cfg.seeds.size())});
    offset += cfg.seeds.size();
  }
  return out;
}

Outcome criterion_6() {
  const auto start = Clock::now();
  auto cells = shipped_cells();
  std::string detail;
  bool ok = true;
  for (const std::string setting : {"noniid", "noniid_intercept"}) {
    const auto c = compare({cells.at({setting, "fedcvr_bolt"})}, cells.at({setting, "uniform"})).front();
    const double imp = c.improvement();
    const bool pass = c.fedcvr < c.uniform && imp >= 0.005 && imp <= 0.10;
    ok = ok && pass;
    detail += setting + ": uniform " + fmt("%.4f", c.uniform) + ", fedcvr_bolt " + fmt("%.4f", c.fedcvr) +
              ", improvement " + fmt("%+.2f%%", 100.0 * imp) + (pass ? "" : " (outside [0.5%, 10%])") + "; ";
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 1800.0;
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome criterion_7() {
  const auto start = Clock::now();
  auto cells = shipped_cells();
  std::vector<runtime::ExperimentConfig> cfgs;
  const std::vector<std::string> names = {"uniform", "power_of_choice", "active_fl", "fedcvr_bolt"};
  for (const auto& p : names) cfgs.push_back(cells.at({"iid", p}));
  const auto results = run_all(cfgs);
  std::vector<double> means;
  std::string detail;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    means.push_back(mean_final_loss(results, offset, cfgs[i].seeds.size()));
    offset += cfgs[i].seeds.size();
    detail += names[i] + " " + fmt("%.4f", means.back()) + ", ";
  }
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  const double spread = (*hi - *lo) / *lo;
  return {spread <= 0.03, detail + "spread " + fmt("%.2f%%", 100.0 * spread) + ", " + fmt("%.1f s", seconds_since(start))};
}

Outcome criterion_8() {
  const auto start = Clock::now();
  auto cells = shipped_cells();
  const auto cfg = cells.at({"noniid", "fedcvr_bolt"});
  const auto results = run_all({cfg});
  std::size_t descending = 0;
  for (const auto& r : results) {
    const std::size_t n = r.trace.size();
    const std::size_t window = std::max<std::size_t>(1, (n + 4) / 5);
    double early = 0.0;
    double late = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      early += r.trace[i].update_norm;
      late += r.trace[n - 1 - i].update_norm;
    }
    if (late < early) ++descending;
  }

  auto full = cfg;
  full.participants = full.task.clients();
  full.trainer.learning_rate = 0.001;
  full.seeds = {0};
  const auto trace = runtime::run_experiment(full, 0).trace;
  std::size_t increases = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].global_train_loss > trace[i - 1].global_train_loss) ++increases;
  }
  const bool ok = descending >= 9 && increases == 0;
  return {ok, std::to_string(descending) + "/" + std::to_string(results.size()) +
                  " seeds with late update norm below early; P = K training loss increases in " +
                  std::to_string(increases) + " of " + std::to_string(trace.size() - 1) + " steps, " +
                  fmt("%.1f s", seconds_since(start))};
}

Outcome criterion_9() {
  const auto start = Clock::now();
  auto cells = shipped_cells();
  const auto base = cells.at({"noniid", "fedcvr_bolt"});
  std::vector<runtime::ExperimentConfig> variants;
  const std::vector<coalition::KernelKind> kinds = {coalition::KernelKind::cosine, coalition::KernelKind::laplacian,
                                                    coalition::KernelKind::sigmoid};
  for (auto kind : kinds) {
    auto v = base;
    std::get<policies::FedCvrConfig>(v.policy).kernel.kind = kind;
    variants.push_back(v);
  }
  const auto cmp = compare(variants, cells.at({"noniid", "uniform"}));
  std::size_t holding = 0;
  std::string detail = "uniform " + fmt("%.4f", cmp.front().uniform);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (cmp[i].fedcvr <= cmp[i].uniform) ++holding;
    detail += ", " + std::string(coalition::to_string(kinds[i])) + " " + fmt("%.4f", cmp[i].fedcvr);
  }
  return {holding >= 2, std::to_string(holding) + "/3 kernels with fedcvr_bolt <= uniform (" + detail + "), " +
                            fmt("%.1f s", seconds_since(start))};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[e.path().filename().string()] = s.str();
  }
  return files;
}

Outcome criterion_10() {
  const auto start = Clock::now();
  auto cfg = shipped_config("noniid.conf");
  cfg.set("experiment.seeds", "0, 1, 2");
  cfg.set("matrix.policies", "uniform, power_of_choice, active_fl, fedcvr_bolt");
  const auto cells = harness::matrix_from_config(cfg);
  const fs::path root = fs::temp_directory_path() / "fedcvr_acceptance_determinism";
  fs::remove_all(root);
  harness::run_matrix(cells, root / "first", 1);
  harness::run_matrix(cells, root / "second", thread_count());
  const auto a = read_tree(root / "first");
  const auto b = read_tree(root / "second");
  fs::remove_all(root);
  const double secs = seconds_since(start);
  return {a == b && a.size() == 13 && secs < 60.0,
          std::to_string(a.size()) + " files, " + (a == b ? "byte-identical" : "DIFFER") + ", " + fmt("%.1f s", secs)};
}

Outcome criterion_11() {
  const auto start = Clock::now();
  auto cells = shipped_cells();
  const std::vector<std::size_t> ks = {50, 100, 200};
  std::vector<double> xs;
  std::vector<double> ys;
  std::string detail;
  for (std::size_t k : ks) {
    auto cfg = cells.at({"noniid", "fedcvr_bolt"});
    cfg.task.regression.clients = k;
    cfg.rounds = 41;
    std::get<policies::FedCvrConfig>(cfg.policy).warmup_rounds = 5;
    cfg.record_wall_clock = true;
    const auto trace = runtime::run_experiment(cfg, 0).trace;
    std::vector<double> times;
    for (const auto& m : trace) {
      if (m.round > 5) times.push_back(m.server_ms);
    }
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2), times.end());
    const double median = times[times.size() / 2];
    xs.push_back(std::log(static_cast<double>(k)));
    ys.push_back(std::log(median));
    detail += "K=" + std::to_string(k) + " " + fmt("%.3f ms", median) + ", ";
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 3.0;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / 3.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope <= 2.3, detail + "fit exponent " + fmt("%.2f", slope) + ", " + fmt("%.1f s", seconds_since(start))};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"variance reduction formula vs Monte-Carlo", criterion_1},
    {"singleton subset equals value vector", criterion_2},
    {"Robbins-Monro batch-mean identity", criterion_3},
    {"spectral planted recovery", criterion_4},
    {"Boltzmann properties", criterion_5},
    {"non-IID improvement over uniform", criterion_6},
    {"IID parity", criterion_7},
    {"descent surrogate", criterion_8},
    {"kernel ablation", criterion_9},
    {"determinism", criterion_10},
    {"server time complexity", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedcvr acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "Run one criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = kCriteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << kCriteria[i].first
              << "): " << o.detail << std::endl;
    if (!o.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

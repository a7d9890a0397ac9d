#include "fedcvr/harness/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <tuple>

#include "fedcvr/error.hpp"

namespace fedcvr::harness {

namespace {

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(values[i]);
  }
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// Commas and newlines would break the row.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace(std::ostream& out, std::string_view policy, std::uint64_t seed,
                 const std::vector<runtime::RoundMetrics>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& m : trace) {
    out << m.round << ',' << policy << ',' << seed << ',' << format_double(m.global_test_loss) << ','
        << format_double(m.global_test_acc) << ',' << format_double(m.update_norm) << ',' << join(m.selected)
        << ',' << join(m.coalition_sizes) << ',' << format_double(m.wall_ms) << '\n';
  }
}

void write_trace_file(const std::filesystem::path& path, std::string_view policy, std::uint64_t seed,
                      const std::vector<runtime::RoundMetrics>& trace) {
  auto out = open_for_write(path);
  write_trace(out, policy, seed, trace);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << sanitize(r.setting) << ',' << sanitize(r.policy) << ',' << r.seeds << ',' << r.succeeded << ','
        << format_double(r.final_loss_mean) << ',' << format_double(r.final_loss_std) << ','
        << format_double(r.final_acc_mean) << ',' << format_double(r.final_acc_std) << ',' << sanitize(r.status)
        << '\n';
  }
}

void write_summary_file(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  auto out = open_for_write(path);
  write_summary(out, rows);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

SummaryRow summarize(std::string setting, std::string policy, const std::vector<double>& final_losses,
                     const std::vector<double>& final_accs, std::size_t seeds) {
  SummaryRow row;
  row.setting = std::move(setting);
  row.policy = std::move(policy);
  row.seeds = seeds;
  row.succeeded = final_losses.size();
  std::tie(row.final_loss_mean, row.final_loss_std) = mean_std(final_losses);
  std::tie(row.final_acc_mean, row.final_acc_std) = mean_std(final_accs);
  return row;
}

}  // namespace fedcvr::harness

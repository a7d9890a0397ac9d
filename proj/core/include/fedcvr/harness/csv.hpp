#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fedcvr/runtime/round.hpp"

namespace fedcvr::harness {

inline constexpr std::string_view kTraceHeader =
    "round,policy,seed,global_test_loss,global_test_acc,update_norm,selected_ids,coalition_sizes,wall_ms";

/// Round-trip formatting for doubles (%.17g).
std::string format_double(double v);

void write_trace(std::ostream& out, std::string_view policy, std::uint64_t seed,
                 const std::vector<runtime::RoundMetrics>& trace);
void write_trace_file(const std::filesystem::path& path, std::string_view policy, std::uint64_t seed,
                      const std::vector<runtime::RoundMetrics>& trace);

struct SummaryRow {
  std::string setting;
  std::string policy;
  std::size_t seeds = 0;
  std::size_t succeeded = 0;
  double final_loss_mean = 0.0;
  double final_loss_std = 0.0;
  double final_acc_mean = 0.0;
  double final_acc_std = 0.0;
  /// "ok", or "FAILED" followed by the first error.
  std::string status = "ok";
};

inline constexpr std::string_view kSummaryHeader =
    "setting,policy,seeds,succeeded,final_loss_mean,final_loss_std,final_acc_mean,final_acc_std,status";

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_file(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// Mean and sample standard deviation (0 for fewer than two values).
SummaryRow summarize(std::string setting, std::string policy, const std::vector<double>& final_losses,
                     const std::vector<double>& final_accs, std::size_t seeds);

}  // namespace fedcvr::harness

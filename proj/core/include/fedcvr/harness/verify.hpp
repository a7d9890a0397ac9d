#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fedcvr::harness {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Small-K self checks of the statistics and coalition code against
/// Monte-Carlo, closed-form and finite-difference references.
std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed = 0);

/// Print one PASS/FAIL line per check; true when all pass.
bool report_verify(const std::vector<VerifyCheck>& checks, std::ostream& out);

}  // namespace fedcvr::harness

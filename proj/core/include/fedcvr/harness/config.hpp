#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fedcvr::harness {

/// Flat key/value configuration with dotted keys.
///
///   # comment
///   [policy]               -> following keys are prefixed "policy."
///   variant = fedcvr_bolt  -> policy.variant
///   seeds = 0, 1, 2        -> lists are comma separated
///
/// Every lookup marks its key as used so that leftover (misspelled) keys
/// can be reported with their line numbers.
class Config {
 public:
  static Config parse(std::istream& in, std::string source = "<config>");
  /// Throws ConfigError if the file cannot be opened or parsed.
  static Config load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  void set(std::string key, std::string value);

  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::uint64_t> get_u64s(std::string_view key, std::vector<std::uint64_t> fallback) const;
  std::vector<std::string> get_list(std::string_view key, std::vector<std::string> fallback) const;

  /// Copy where every "prefix.X" entry overrides "X"; prefixed entries are
  /// removed from the copy.
  Config overlay(std::string_view prefix) const;

  /// Keys never looked up, excluding the given prefixes.
  std::vector<std::string> unused_keys(const std::vector<std::string>& ignore_prefixes = {}) const;
  /// Throws ConfigError naming the first unused key and its line.
  void reject_unused(const std::vector<std::string>& ignore_prefixes = {}) const;

  /// "source:line" for a key, or the source name alone.
  std::string where(std::string_view key) const;
  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry* find(std::string_view key) const;
  [[noreturn]] void bad_value(std::string_view key, std::string_view expected) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
  mutable std::set<std::string, std::less<>> used_;
};

}  // namespace fedcvr::harness

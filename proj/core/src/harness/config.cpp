#include "fedcvr/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fedcvr/error.hpp"

namespace fedcvr::harness {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss{std::string(value)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Config Config::parse(std::istream& in, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(cfg.source_ + ":" + std::to_string(line) + ": unterminated section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!section.empty() && !valid_key(section)) {
        throw ConfigError(cfg.source_ + ":" + std::to_string(line) + ": invalid section name '" + section + "'");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(cfg.source_ + ":" + std::to_string(line) + ": invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full)) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(line) + ": duplicate key '" + full + "'");
    }
    cfg.entries_[full] = Entry{value, line};
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void Config::set(std::string key, std::string value) {
  entries_[std::move(key)] = Entry{std::move(value), 0};
}

const Config::Entry* Config::find(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(it->first);
  return &it->second;
}

std::string Config::where(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second.line == 0) return source_;
  return source_ + ":" + std::to_string(it->second.line);
}

void Config::bad_value(std::string_view key, std::string_view expected) const {
  throw ConfigError(where(key) + ": key '" + std::string(key) + "' expects " + std::string(expected) + ", got '" +
                    find(key)->value + "'");
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  const Entry* e = find(key);
  return e ? e->value : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v)) bad_value(key, "a real number");
  return v;
}

std::size_t Config::get_size(std::string_view key, std::size_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::size_t v = 0;
  if (!parse_number(e->value, v)) bad_value(key, "a non-negative integer");
  return v;
}

std::uint64_t Config::get_u64(std::string_view key, std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  if (!parse_number(e->value, v)) bad_value(key, "a non-negative integer");
  return v;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes" || e->value == "on") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no" || e->value == "off") return false;
  bad_value(key, "a boolean");
}

std::vector<double> Config::get_doubles(std::string_view key, std::vector<double> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    double v = 0.0;
    if (!parse_number(item, v)) bad_value(key, "a comma-separated list of reals");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> Config::get_u64s(std::string_view key, std::vector<std::uint64_t> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(e->value)) {
    std::uint64_t v = 0;
    if (!parse_number(item, v)) bad_value(key, "a comma-separated list of non-negative integers");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::get_list(std::string_view key, std::vector<std::string> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  return split_list(e->value);
}

Config Config::overlay(std::string_view prefix) const {
  Config out;
  out.source_ = source_;
  const std::string pre = std::string(prefix) + ".";
  for (const auto& [key, entry] : entries_) {
    if (key.rfind(pre, 0) == 0) continue;
    out.entries_[key] = entry;
  }
  for (const auto& [key, entry] : entries_) {
    if (key.rfind(pre, 0) == 0) out.entries_[key.substr(pre.size())] = entry;
  }
  return out;
}

std::vector<std::string> Config::unused_keys(const std::vector<std::string>& ignore_prefixes) const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) {
    if (used_.count(key)) continue;
    const bool ignored = std::any_of(ignore_prefixes.begin(), ignore_prefixes.end(),
                                     [&](const std::string& p) { return key.rfind(p, 0) == 0; });
    if (!ignored) out.push_back(key);
  }
  return out;
}

void Config::reject_unused(const std::vector<std::string>& ignore_prefixes) const {
  const auto unused = unused_keys(ignore_prefixes);
  if (!unused.empty()) throw ConfigError(where(unused.front()) + ": unknown key '" + unused.front() + "'");
}

}  // namespace fedcvr::harness

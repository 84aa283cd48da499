#pragma once

// key = value run configuration.  '#' starts a comment, blank lines are
// ignored, keys are [A-Za-z0-9_.]+ and may appear once.  Every getter marks
// its key as consumed; require_consumed() rejects whatever is left, so a
// misspelt key is an error instead of a silent default.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zr {

class KvConfig {
 public:
  static KvConfig parse(std::string_view text, const std::string& source = "<config>");
  static KvConfig load(const std::filesystem::path& path);

  // Insert or replace (command-line overrides).
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::optional<double> get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<long long> get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::optional<std::uint64_t> get_u64(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // comma separated
  std::optional<std::vector<double>> get_double_list(const std::string& key) const;
  std::optional<std::vector<long long>> get_int_list(const std::string& key) const;

  void require_consumed() const;

  // File order, overrides appended.
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string serialize() const;

 private:
  const std::string* find(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_ = "<config>";
  mutable std::set<std::string> consumed_;
};

// Strict parses: the whole token must be consumed.
double parse_double(std::string_view text, const std::string& what);
long long parse_int(std::string_view text, const std::string& what);
std::uint64_t parse_u64(std::string_view text, const std::string& what);

}  // namespace zr

#include "zr/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "zr/errors.hpp"

namespace zr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  return true;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

double parse_double(std::string_view text, const std::string& what) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(what + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

long long parse_int(std::string_view text, const std::string& what) {
  text = trim(text);
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    // accept integral floats such as 1e6
    double d = 0.0;
    auto [p2, e2] = std::from_chars(text.data(), end, d);
    if (e2 == std::errc() && p2 == end && !text.empty() && d == static_cast<double>(static_cast<long long>(d)) &&
        std::abs(d) < 9e15)
      return static_cast<long long>(d);
    throw ConfigError(what + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(what + ": expected an unsigned 64-bit integer, got '" + std::string(text) + "'");
  return v;
}

KvConfig KvConfig::parse(std::string_view text, const std::string& source) {
  KvConfig c;
  c.source_ = source;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const std::string where = source + ":" + std::to_string(line_no);
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
      if (c.find(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      c.entries_.emplace_back(key, value);
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return c;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KvConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

const std::string* KvConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool KvConfig::has(const std::string& key) const { return find(key) != nullptr; }

std::optional<std::string> KvConfig::get_string(const std::string& key) const {
  consumed_.insert(key);
  if (const auto* v = find(key)) return *v;
  return std::nullopt;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}

std::optional<double> KvConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  return parse_double(*s, key);
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return get_double(key).value_or(fallback);
}

std::optional<long long> KvConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  return parse_int(*s, key);
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  return get_int(key).value_or(fallback);
}

std::optional<std::uint64_t> KvConfig::get_u64(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  return parse_u64(*s, key);
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  const auto s = get_string(key);
  if (!s) return fallback;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + *s + "'");
}

std::optional<std::vector<double>> KvConfig::get_double_list(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  for (auto tok : split_commas(*s)) out.push_back(parse_double(tok, key));
  return out;
}

std::optional<std::vector<long long>> KvConfig::get_int_list(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::vector<long long> out;
  for (auto tok : split_commas(*s)) out.push_back(parse_int(tok, key));
  return out;
}

void KvConfig::require_consumed() const {
  std::string bad;
  for (const auto& [k, v] : entries_)
    if (!consumed_.count(k)) bad += (bad.empty() ? "" : ", ") + k;
  if (!bad.empty()) throw ConfigError(source_ + ": unknown key(s) for this command: " + bad);
}

std::string KvConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace zr

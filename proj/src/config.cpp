#include "ks2/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ks2 {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
  Config c;
  c.source_ = std::move(source);
  std::size_t line_no = 0;
  std::size_t order = 0;
  bool more = true;
  while (more) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    more = eol != std::string_view::npos;
    if (more) text = text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", c.source_, line_no, line));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(fmt::format("{}:{}: invalid key '{}'", c.source_, line_no, key));
    if (value.empty()) throw ConfigError(fmt::format("{}:{}: key '{}' has no value", c.source_, line_no, key));
    if (auto it = c.entries_.find(key); it != c.entries_.end()) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}' (first set on line {})", c.source_, line_no, key, it->second.line));
    }
    c.entries_.emplace(std::string(key), Entry{std::string(value), line_no, order++, false});
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const Config::Entry* Config::find(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void Config::fail(const Entry& e, std::string_view key, std::string_view what) const {
  throw ConfigError(fmt::format("{}:{}: {}: {} (got '{}')", source_, e.line, key, what, e.value));
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::vector<std::string> Config::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& [k, e] : entries_) {
    if (std::string_view(k).substr(0, prefix.size()) == prefix) found.emplace_back(e.order, k);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

std::optional<std::string> Config::get_string(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> Config::get_double(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  auto v = parse_number<double>(e->value);
  if (!v) fail(*e, key, "expected a number");
  return v;
}

std::optional<long long> Config::get_int(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  auto v = parse_number<long long>(e->value);
  if (!v) fail(*e, key, "expected an integer");
  return v;
}

std::optional<std::vector<double>> Config::get_doubles(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  std::vector<double> out;
  std::string_view rest = e->value;
  while (true) {
    const std::size_t comma = rest.find(',');
    auto v = parse_number<double>(rest.substr(0, comma));
    if (!v) fail(*e, key, "expected a comma-separated list of numbers");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

double Config::get_double(std::string_view key, double fallback) const { return get_double(key).value_or(fallback); }
long long Config::get_int(std::string_view key, long long fallback) const { return get_int(key).value_or(fallback); }
std::string Config::get_string(std::string_view key, std::string fallback) const {
  return get_string(key).value_or(std::move(fallback));
}

double Config::require_double(std::string_view key) const {
  auto v = get_double(key);
  if (!v) throw ConfigError(fmt::format("{}: missing required key '{}'", source_, key));
  return *v;
}

void Config::reject_unknown() const {
  const Entry* first = nullptr;
  std::string_view name;
  for (const auto& [k, e] : entries_) {
    if (!e.used && (!first || e.line < first->line)) {
      first = &e;
      name = k;
    }
  }
  if (first) throw ConfigError(fmt::format("{}:{}: unknown key '{}'", source_, first->line, name));
}

std::string Config::where(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return source_;
  return fmt::format("{}:{}", source_, it->second.line);
}

}  // namespace ks2

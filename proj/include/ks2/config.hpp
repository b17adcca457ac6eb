#pragma once

// Flat "key = value" configuration text with dotted section names, e.g.
//
//   # comment
//   params.mu = 1.0
//   solver.epsilon = 0.125
//
// Every key must be consumed by the caller; leftovers are reported as unknown.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ks2 {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  /// `source` names the text in error messages ("file:line: ...").
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  /// Keys starting with `prefix`, in file order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  /// Comma-separated numbers.
  std::optional<std::vector<double>> get_doubles(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  std::string get_string(std::string_view key, std::string fallback) const;

  double require_double(std::string_view key) const;

  /// Throws ConfigError naming the first key nobody asked for.
  void reject_unknown() const;

  /// "source:line" of a key, for error messages.
  std::string where(std::string_view key) const;
  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t order = 0;
    mutable bool used = false;
  };
  const Entry* find(std::string_view key) const;
  [[noreturn]] void fail(const Entry& e, std::string_view key, std::string_view what) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace ks2

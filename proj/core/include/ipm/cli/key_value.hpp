#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ipm::cli {

/// `key = value` lines; `#` starts a comment; later keys override earlier ones.
///
/// Numbers accept the dyadic shorthand `2^k` (e.g. `dt = 2^-7`) besides the
/// usual decimal forms.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Applies one `key=value` override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::optional<std::string> raw(const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  [[nodiscard]] std::vector<double> get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const;

  /// Keys with the given prefix, prefix stripped.
  [[nodiscard]] std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  /// Throws ConfigError naming the first key that is neither in `known` nor
  /// starts with one of `prefixes`.
  void require_known(const std::set<std::string>& known, const std::vector<std::string>& prefixes = {}) const;

  /// Sorted `key = value` dump, parseable by parse().
  [[nodiscard]] std::string dump() const;
  void write(const std::filesystem::path& path) const;

  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Parses a real number, accepting `2^k`. Throws ConfigError mentioning `what`.
[[nodiscard]] double parse_number(const std::string& text, const std::string& what);

/// Comma-separated numbers.
[[nodiscard]] std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace ipm::cli

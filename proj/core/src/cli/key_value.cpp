#include "ipm/cli/key_value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ipm/error.hpp"

namespace ipm::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_number(const std::string& raw_text, const std::string& what) {
  const std::string text = trim(raw_text);
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    const double base = parse_number(text.substr(0, caret), what);
    const double exponent = parse_number(text.substr(caret + 1), what);
    return std::pow(base, exponent);
  }
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(what + ": expected a number, got '" + raw_text + "'");
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number(item, what));
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig c;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty configuration key");
  values_[key] = value;
}

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  return v ? parse_number(*v, key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  const double d = parse_number(*v, key);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) throw ConfigError(key + ": expected an integer, got '" + *v + "'");
  return static_cast<std::int64_t>(d);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const std::string t = trim(*v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + *v + "'");
  }
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::string t = trim(*v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const {
  const auto v = raw(key);
  return v ? parse_number_list(*v, key) : fallback;
}

std::map<std::string, std::string> KeyValueConfig::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : values_) {
    if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0) out[k.substr(prefix.size())] = v;
  }
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known,
                                   const std::vector<std::string>& prefixes) const {
  for (const auto& [k, v] : values_) {
    if (known.count(k)) continue;
    const bool prefixed = std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) {
      return k.size() > p.size() && k.compare(0, p.size(), p) == 0;
    });
    if (!prefixed) throw ConfigError("unknown configuration key '" + k + "'");
  }
}

std::string KeyValueConfig::dump() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
  return s;
}

void KeyValueConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ipm::cli

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radarpose {

/// `key = value` text. Blank lines and lines starting with '#' are skipped;
/// keys may use '-' or '_' interchangeably and are stored with '_'.
class KeyValueConfig {
 public:
  /// Throws std::invalid_argument naming the line on malformed input or a
  /// repeated key.
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  /// Comma-separated list; surrounding spaces trimmed.
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Throws std::invalid_argument on the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace radarpose

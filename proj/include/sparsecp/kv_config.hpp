#pragma once

// "key = value" text files. '#' starts a comment; blank lines are ignored.
// Lists are comma separated.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sparsecp {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  double require_double(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;

  /// Keys present in the file that no getter has asked for.
  std::vector<std::string> unused_keys() const;

  const std::string& source() const { return source_; }

 private:
  const std::string* lookup(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace sparsecp

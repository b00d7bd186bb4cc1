// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_CONFIG_H_
#define MPRNN_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mprnn {

// Flat "section.key = value" text. '#' starts a comment; blank lines are
// ignored. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string &text);
  static KeyValueConfig Load(const std::string &path);

  // "key=value"
  void ApplyOverride(const std::string &assignment);
  void Set(const std::string &key, const std::string &value) { values_[key] = value; }
  bool Has(const std::string &key) const { return values_.contains(key); }

  std::optional<std::string> Get(const std::string &key) const;
  std::string GetString(const std::string &key, const std::string &fallback) const;
  int64_t GetInt(const std::string &key, int64_t fallback) const;
  double GetDouble(const std::string &key, double fallback) const;
  bool GetBool(const std::string &key, bool fallback) const;
  std::vector<int64_t> GetIntList(const std::string &key,
                                  const std::vector<int64_t> &fallback) const;

  // Keys under "<section>." with the prefix stripped.
  KeyValueConfig Section(const std::string &section) const;
  // Keys in a section the caller does not know about.
  std::vector<std::string> UnknownKeys(const std::string &section,
                                       const std::vector<std::string> &known) const;

  // Sorted "key = value" lines.
  std::string ToText() const;

  const std::map<std::string, std::string> &values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string Trim(const std::string &s);
std::vector<std::string> SplitString(const std::string &s, char sep);

}  // namespace mprnn

#endif  // MPRNN_CONFIG_H_

// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mprnn/error.h"

namespace mprnn {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitString(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(Trim(cur));
  return out;
}

KeyValueConfig KeyValueConfig::Parse(const std::string &text) {
  KeyValueConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": expected key = value, got '" + line + "'");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = Trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void KeyValueConfig::ApplyOverride(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || Trim(assignment.substr(0, eq)).empty()) {
    throw InvalidArgument("override must look like key=value, got '" + assignment + "'");
  }
  values_[Trim(assignment.substr(0, eq))] = Trim(assignment.substr(eq + 1));
}

std::optional<std::string> KeyValueConfig::Get(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string &key,
                                      const std::string &fallback) const {
  return Get(key).value_or(fallback);
}

namespace {

int64_t ParseInt(const std::string &key, const std::string &v) {
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config key " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

}  // namespace

int64_t KeyValueConfig::GetInt(const std::string &key, int64_t fallback) const {
  auto v = Get(key);
  return v ? ParseInt(key, *v) : fallback;
}

double KeyValueConfig::GetDouble(const std::string &key, double fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception &) {
    throw InvalidArgument("config key " + key + ": expected a number, got '" + *v + "'");
  }
}

bool KeyValueConfig::GetBool(const std::string &key, bool fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw InvalidArgument("config key " + key + ": expected a boolean, got '" + *v + "'");
}

std::vector<int64_t> KeyValueConfig::GetIntList(const std::string &key,
                                                const std::vector<int64_t> &fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  std::vector<int64_t> out;
  for (const std::string &part : SplitString(*v, ',')) out.push_back(ParseInt(key, part));
  return out;
}

KeyValueConfig KeyValueConfig::Section(const std::string &section) const {
  KeyValueConfig out;
  const std::string prefix = section + ".";
  for (const auto &[k, v] : values_) {
    if (k.starts_with(prefix)) out.values_[k.substr(prefix.size())] = v;
  }
  return out;
}

std::vector<std::string> KeyValueConfig::UnknownKeys(
    const std::string &section, const std::vector<std::string> &known) const {
  std::vector<std::string> out;
  const std::string prefix = section + ".";
  for (const auto &[k, v] : values_) {
    if (!k.starts_with(prefix)) continue;
    const std::string rest = k.substr(prefix.size());
    if (std::find(known.begin(), known.end(), rest) == known.end()) out.push_back(k);
  }
  return out;
}

std::string KeyValueConfig::ToText() const {
  std::ostringstream os;
  for (const auto &[k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace mprnn

#include "bintopo/core/params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "bintopo/core/errors.hpp"

namespace bintopo {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::string body = trim(s);
  if (!body.empty() && body.front() == '[' && body.back() == ']') {
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Params::Params(std::map<std::string, std::string> values, std::string section)
    : values_(std::move(values)), section_(std::move(section)) {}

std::string Params::where(const std::string& key) const {
  return section_.empty() ? "'" + key + "'" : "'" + section_ + "." + key + "'";
}

std::string Params::get_string(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : trim(it->second);
}

double Params::get_double(const std::string& key, double fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = trim(it->second);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where(key) + " is not a number: '" + v + "'");
  }
}

long long Params::get_int(const std::string& key, long long fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = trim(it->second);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(where(key) + " is not an integer: '" + v + "'");
  }
  return out;
}

std::size_t Params::get_size(const std::string& key, std::size_t fallback) {
  const long long v = get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(where(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

bool Params::get_bool(const std::string& key, bool fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where(key) + " is not a boolean: '" + v + "'");
}

std::vector<int> Params::get_int_list(const std::string& key, const std::vector<int>& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(it->second)) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(where(key) + " has a non-integer entry '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> Params::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(where(key) + " has a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

void Params::finish() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + where(k);
  }
  if (!unknown.empty()) throw ConfigError("unknown key(s): " + unknown);
}

}  // namespace bintopo

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace bintopo {

// String key/value parameters for one config section. Getters record which
// keys were read; finish() rejects any key nobody asked for, so a misspelled
// hyperparameter is an error instead of a silent default.
class Params {
 public:
  Params() = default;
  explicit Params(std::map<std::string, std::string> values, std::string section = "");

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key, long long fallback);
  std::size_t get_size(const std::string& key, std::size_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback);
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback);

  // Throws ConfigError listing keys never read.
  void finish() const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& section() const { return section_; }

 private:
  std::string where(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
  std::string section_;
};

}  // namespace bintopo

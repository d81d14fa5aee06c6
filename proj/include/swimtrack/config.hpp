#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace swimtrack {

// Flat key-value configuration with dotted section prefixes, e.g.
//   hydro.rho = 1000
//   mixer.leg_health = 1,1,1,1,1,0
// Lines starting with '#' are comments.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // Parses a "key=value" override as passed on the command line.
  void set_override(const std::string& assignment);

  bool has(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  Eigen::Vector3d get_vec3(const std::string& key, const Eigen::Vector3d& fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  void merge(const Config& other);  // other wins on conflicts

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace swimtrack

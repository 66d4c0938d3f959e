#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/env.hpp"
#include "routerlab/training.hpp"

namespace routerlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered key = value store. `#` starts a comment, blank lines are skipped,
// duplicate keys are rejected. Reads are tracked so a typed loader can
// reject keys it never consumed (usually typos).
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<long> get_long_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  // insertion-ordered "key = value" lines; parse(serialize()) round-trips
  std::string serialize() const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::vector<std::string> unused_keys() const;

 private:
  const std::string& raw(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
  mutable std::vector<bool> used_;
};

// Everything a lab run needs, with the reference defaults baked in. Config
// files override; unknown keys are an error.
struct LabConfig {
  std::uint64_t seed = 1;
  int train_tasks = 400;
  int eval_tasks = 300;

  EnvConfig env;
  CostModel cost;
  RewardConfig reward;  // lambda is swept, see lambda_list
  BopoConfig bopo;

  int taxonomy_trials = 5;
  int stratified_levels = 20;
  double sft_hard_share = 0.7;

  std::vector<double> lambda_list{0.1, 0.3, 0.5, 0.7, 0.9};

  int eval_seeds = 3;
  int episodes_per_task = 40;
  std::vector<double> random_p_list{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<int> first_large_list{2, 4, 8};
  std::vector<int> budget_list{5, 10, 15};
  double cascade_threshold = 0.95;
  double single_turn_cutoff = 0.95;
  double reference_lambda = 0.3;  // router used in budget/allocation reports

  void validate() const;
};

LabConfig lab_config_from(const KeyValueConfig& kv);
LabConfig load_lab_config(const std::string& path);

}  // namespace routerlab

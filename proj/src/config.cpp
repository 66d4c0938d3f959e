#include "routerlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace routerlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    std::size_t hash = t.find('#');  // full-line and trailing comments
    if (hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    kv.set(key, value);
  }
  return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_string(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (index_.count(key)) throw ConfigError("duplicate config key: " + key);
  index_[key] = entries_.size();
  entries_.emplace_back(key, value);
  used_.push_back(false);
}

bool KeyValueConfig::has(const std::string& key) const {
  return index_.count(key) != 0;
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw ConfigError("missing config key: " + key);
  used_[it->second] = true;
  return entries_[it->second].second;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  return raw(key);
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: '" + v + "'");
  }
}

long KeyValueConfig::get_long(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: '" + v + "'");
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t pos = 0;
    std::uint64_t n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an unsigned integer: '" +
                      v + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + key + ": not a bool: '" + v + "'");
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key) const {
  const std::string& v = raw(key);
  std::vector<double> out;
  for (const std::string& item : split(v, ',')) {
    std::string t = trim(item);
    try {
      std::size_t pos = 0;
      double d = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument("trailing characters");
      out.push_back(d);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": bad list item: '" + t + "'");
    }
  }
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}

std::vector<long> KeyValueConfig::get_long_list(const std::string& key) const {
  const std::string& v = raw(key);
  std::vector<long> out;
  for (const std::string& item : split(v, ',')) {
    std::string t = trim(item);
    try {
      std::size_t pos = 0;
      long n = std::stol(t, &pos);
      if (pos != t.size()) throw std::invalid_argument("trailing characters");
      out.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": bad list item: '" + t + "'");
    }
  }
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
  return out.str();
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!used_[i]) out.push_back(entries_[i].first);
  return out;
}

void LabConfig::validate() const {
  try {
    env.validate();
    cost.validate();
    bopo.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (train_tasks < 1 || eval_tasks < 1)
    throw ConfigError("task counts must be >= 1");
  if (taxonomy_trials < 1) throw ConfigError("taxonomy.trials must be >= 1");
  if (stratified_levels < 1) throw ConfigError("synth.levels must be >= 1");
  if (sft_hard_share < 0.0 || sft_hard_share > 1.0)
    throw ConfigError("synth.hard_share outside [0,1]");
  if (lambda_list.empty()) throw ConfigError("train.lambda_list empty");
  for (double l : lambda_list)
    if (l < 0.0) throw ConfigError("negative lambda");
  if (eval_seeds < 1) throw ConfigError("eval.seeds must be >= 1");
  if (episodes_per_task < 1)
    throw ConfigError("eval.episodes_per_task must be >= 1");
  for (double p : random_p_list)
    if (p < 0.0 || p > 1.0) throw ConfigError("random_p outside [0,1]");
  for (int k : first_large_list)
    if (k < 0) throw ConfigError("negative first_large entry");
  for (int k : budget_list)
    if (k < 1) throw ConfigError("budget entries must be >= 1");
  if (std::find(lambda_list.begin(), lambda_list.end(), reference_lambda) ==
      lambda_list.end())
    throw ConfigError("eval.reference_lambda not in train.lambda_list");
}

LabConfig lab_config_from(const KeyValueConfig& kv) {
  LabConfig c;
  auto ov_d = [&](const char* k, double& x) { if (kv.has(k)) x = kv.get_double(k); };
  auto ov_i = [&](const char* k, int& x) { if (kv.has(k)) x = static_cast<int>(kv.get_long(k)); };
  auto ov_b = [&](const char* k, bool& x) { if (kv.has(k)) x = kv.get_bool(k); };
  auto ov_dl = [&](const char* k, std::vector<double>& x) { if (kv.has(k)) x = kv.get_double_list(k); };
  auto ov_il = [&](const char* k, std::vector<int>& x) {
    if (!kv.has(k)) return;
    x.clear();
    for (long v : kv.get_long_list(k)) x.push_back(static_cast<int>(v));
  };

  if (kv.has("run.seed")) c.seed = kv.get_u64("run.seed");
  ov_i("run.train_tasks", c.train_tasks);
  ov_i("run.eval_tasks", c.eval_tasks);

  ov_i("env.horizon", c.env.horizon);
  ov_i("env.n_critical_min", c.env.n_critical_min);
  ov_i("env.n_critical_max", c.env.n_critical_max);
  ov_d("env.q_small", c.env.q_small);
  ov_d("env.q_large", c.env.q_large);
  ov_d("env.q_large_intractable", c.env.q_large_intractable);
  ov_d("env.intractable_fraction", c.env.intractable_fraction);
  ov_d("env.hint_noise", c.env.hint_noise);
  ov_i("env.history_window", c.env.history_window);
  if (kv.has("env.fail_mode")) {
    std::string m = kv.get_string("env.fail_mode");
    if (m == "terminate_on_fail") c.env.fail_mode = FailMode::terminate_on_fail;
    else if (m == "run_to_horizon") c.env.fail_mode = FailMode::run_to_horizon;
    else throw ConfigError("env.fail_mode: unknown mode '" + m + "'");
  }

  ov_d("cost.c_small", c.cost.c_small);
  ov_d("cost.c_large", c.cost.c_large);

  ov_i("taxonomy.trials", c.taxonomy_trials);
  ov_i("synth.levels", c.stratified_levels);
  ov_d("synth.hard_share", c.sft_hard_share);

  ov_d("reward.success", c.reward.success);
  ov_d("reward.hard_bonus", c.reward.hard_bonus);
  ov_d("reward.epsilon_norm", c.reward.epsilon_norm);
  ov_d("reward.epsilon_adv", c.reward.epsilon_adv);

  ov_i("train.group_size", c.bopo.group_size);
  ov_d("train.beta_kl", c.bopo.beta_kl);
  ov_d("train.learning_rate", c.bopo.learning_rate);
  ov_d("train.sft_learning_rate", c.bopo.sft_learning_rate);
  ov_d("train.ratio_clip", c.bopo.ratio_clip);
  ov_i("train.iterations", c.bopo.iterations);
  ov_i("train.tasks_per_batch", c.bopo.tasks_per_batch);
  ov_i("train.sft_iterations", c.bopo.sft_iterations);
  ov_i("train.sft_batch_size", c.bopo.sft_batch_size);
  ov_dl("train.lambda_list", c.lambda_list);
  if (kv.has("train.reward_scheme")) {
    std::string m = kv.get_string("train.reward_scheme");
    if (m == "boundary_relative")
      c.bopo.reward_scheme = RewardScheme::boundary_relative;
    else if (m == "vanilla_raw")
      c.bopo.reward_scheme = RewardScheme::vanilla_raw;
    else
      throw ConfigError("train.reward_scheme: unknown scheme '" + m + "'");
  }
  ov_b("train.use_reference", c.bopo.use_reference);
  ov_d("train.divergence_guard", c.bopo.divergence_guard);

  ov_i("eval.seeds", c.eval_seeds);
  ov_i("eval.episodes_per_task", c.episodes_per_task);
  ov_dl("eval.random_p_list", c.random_p_list);
  ov_il("eval.first_large_list", c.first_large_list);
  ov_il("eval.budget_list", c.budget_list);
  ov_d("eval.cascade_threshold", c.cascade_threshold);
  ov_d("eval.single_turn_cutoff", c.single_turn_cutoff);
  ov_d("eval.reference_lambda", c.reference_lambda);

  std::vector<std::string> unknown = kv.unused_keys();
  if (!unknown.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

LabConfig load_lab_config(const std::string& path) {
  return lab_config_from(KeyValueConfig::parse_file(path));
}

}  // namespace routerlab

#include "routerlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace routerlab {

void CostModel::validate() const {
  if (!(c_small > 0.0) || !(c_large > 0.0))
    throw std::invalid_argument("cost model: prices must be positive");
  if (c_large < c_small)
    throw std::invalid_argument("cost model: c_large must be >= c_small");
}

void EnvConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("env: horizon must be >= 1");
  if (n_critical_min < 0 || n_critical_max < n_critical_min)
    throw std::invalid_argument("env: bad n_critical range");
  if (n_critical_max > horizon)
    throw std::invalid_argument("env: n_critical_max exceeds horizon");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(q_small) || !prob(q_large) || !prob(q_large_intractable) ||
      !prob(intractable_fraction) || !prob(hint_noise))
    throw std::invalid_argument("env: probabilities must lie in [0,1]");
  if (q_large < q_small)
    throw std::invalid_argument("env: q_large must be >= q_small");
  if (history_window < 1)
    throw std::invalid_argument("env: history_window must be >= 1");
}

bool Task::is_critical(int step) const {
  return std::binary_search(critical_steps.begin(), critical_steps.end(),
                            step);
}

Task generate_task(const EnvConfig& cfg, std::uint64_t seed,
                   std::uint64_t task_id) {
  cfg.validate();
  RngStream rng(derive_seed(seed, "task", task_id));
  Task t;
  t.task_id = task_id;
  t.horizon = cfg.horizon;
  int n = static_cast<int>(rng.uniform_int(
      static_cast<std::uint64_t>(cfg.n_critical_min),
      static_cast<std::uint64_t>(cfg.n_critical_max)));
  // sample n distinct positions without replacement
  std::vector<int> pool(cfg.horizon);
  for (int i = 0; i < cfg.horizon; ++i) pool[i] = i;
  for (int i = 0; i < n; ++i) {
    int j = i + static_cast<int>(rng.uniform_int(
                    0, static_cast<std::uint64_t>(cfg.horizon - 1 - i)));
    std::swap(pool[i], pool[j]);
  }
  t.critical_steps.assign(pool.begin(), pool.begin() + n);
  std::sort(t.critical_steps.begin(), t.critical_steps.end());
  t.intractable_draw = rng.bernoulli(cfg.intractable_fraction);
  if (t.intractable_draw) {
    t.p_clear_large = cfg.q_large_intractable;
    // keep the weak model weakly dominated on every task
    t.p_clear_small = std::min(cfg.q_small, cfg.q_large_intractable);
  } else {
    t.p_clear_large = cfg.q_large;
    t.p_clear_small = cfg.q_small;
  }
  return t;
}

EpisodeState reset_episode(const EnvConfig& cfg, const Task& task,
                           RngStream& rng) {
  EpisodeState st;
  st.records.reserve(static_cast<std::size_t>(task.horizon));
  bool crit0 = task.is_critical(0);
  st.struggle = crit0 != rng.bernoulli(cfg.hint_noise);
  return st;
}

bool episode_terminated(const EnvConfig& cfg, const Task& task,
                        const EpisodeState& st) {
  if (st.current_step >= task.horizon) return true;
  if (st.failed && cfg.fail_mode == FailMode::terminate_on_fail) return true;
  // task complete: every critical step cleared (checked after >=1 step so a
  // zero-critical task still takes one action)
  if (st.current_step > 0 &&
      st.cleared_count == static_cast<int>(task.critical_steps.size()))
    return true;
  return false;
}

StepRecord env_step(const EnvConfig& cfg, const Task& task, EpisodeState& st,
                    RouterAction action, const CostModel& cm, RngStream& rng) {
  if (episode_terminated(cfg, task, st))
    throw std::logic_error("env_step called on terminated episode");
  StepRecord rec;
  rec.step_index = st.current_step;
  rec.action = action;
  rec.struggle_shown = st.struggle;
  rec.cost = action == RouterAction::LARGE ? cm.c_large : cm.c_small;
  if (task.is_critical(st.current_step)) {
    double q = action == RouterAction::LARGE ? task.p_clear_large
                                             : task.p_clear_small;
    if (rng.u01() < q) {
      rec.outcome = StepOutcome::cleared;
      ++st.cleared_count;
    } else {
      rec.outcome = StepOutcome::missed;  // misses are permanent
      st.failed = true;
    }
  } else {
    rec.outcome = StepOutcome::noncritical;
  }
  st.records.push_back(rec);
  ++st.current_step;
  if (st.current_step < task.horizon) {
    bool crit = task.is_critical(st.current_step);
    st.struggle = crit != rng.bernoulli(cfg.hint_noise);
  }
  return rec;
}

Trajectory finalize_trajectory(const Task& task, const EpisodeState& st,
                               std::uint64_t episode_seed) {
  Trajectory tr;
  tr.task_id = task.task_id;
  tr.seed = episode_seed;
  tr.records = st.records;
  tr.success =
      st.cleared_count == static_cast<int>(task.critical_steps.size()) &&
      !st.failed;
  for (const auto& r : tr.records) {
    tr.total_cost += r.cost;
    if (r.action == RouterAction::LARGE) ++tr.large_calls;
  }
  return tr;
}

bool is_success(const Trajectory& traj, const Task& task) {
  int cleared = 0;
  for (const auto& r : traj.records) {
    if (r.outcome == StepOutcome::missed) return false;
    if (r.outcome == StepOutcome::cleared) ++cleared;
  }
  return cleared == static_cast<int>(task.critical_steps.size());
}

FeatureVector observe(const EnvConfig& cfg, const Task& task,
                      const EpisodeState& st, const BudgetState* budget,
                      double taxonomy_hint) {
  FeatureVector f{};
  f[0] = 1.0;
  f[1] = static_cast<double>(st.current_step) /
         static_cast<double>(task.horizon);
  f[2] = st.struggle ? 1.0 : 0.0;
  int w = cfg.history_window;
  int n = static_cast<int>(st.records.size());
  int lo = std::max(0, n - w);
  int misses = 0, larges = 0;
  for (int i = lo; i < n; ++i) {
    if (st.records[i].outcome == StepOutcome::missed) ++misses;
    if (st.records[i].action == RouterAction::LARGE) ++larges;
  }
  f[3] = static_cast<double>(misses) / static_cast<double>(w);
  int window = n - lo;
  f[4] = window > 0 ? static_cast<double>(larges) / window : 0.0;
  f[5] = budget ? budget->remaining_fraction() : 1.0;
  f[6] = taxonomy_hint;
  return f;
}

namespace {

// Walks the clear/miss branch tree. Once a miss happens under run_to_horizon
// the tail is deterministic in cost, so the branch collapses.
struct Enumerator {
  const EnvConfig& cfg;
  const Task& task;
  const std::vector<RouterAction>& schedule;
  const CostModel& cm;
  double p_success = 0.0;
  double expected_cost = 0.0;

  double step_cost(int i) const {
    return schedule[static_cast<std::size_t>(i)] == RouterAction::LARGE
               ? cm.c_large
               : cm.c_small;
  }

  void walk(int step, int cleared, double prob, double cost) {
    if (cleared == static_cast<int>(task.critical_steps.size())) {
      if (step > 0) {
        p_success += prob;
        expected_cost += prob * cost;
        return;
      }
      // zero-critical task: completion is only observed after one step
    }
    if (step >= task.horizon) {
      expected_cost += prob * cost;
      return;
    }
    double c = cost + step_cost(step);
    if (!task.is_critical(step)) {
      walk(step + 1, cleared, prob, c);
      return;
    }
    double q = schedule[static_cast<std::size_t>(step)] == RouterAction::LARGE
                   ? task.p_clear_large
                   : task.p_clear_small;
    if (q > 0.0) walk(step + 1, cleared + 1, prob * q, c);
    double pm = prob * (1.0 - q);
    if (pm <= 0.0) return;
    if (cfg.fail_mode == FailMode::terminate_on_fail) {
      expected_cost += pm * c;
    } else {
      double tail = 0.0;
      for (int t = step + 1; t < task.horizon; ++t) tail += step_cost(t);
      expected_cost += pm * (c + tail);
    }
  }
};

}  // namespace

std::pair<double, double> exact_episode_stats(
    const EnvConfig& cfg, const Task& task,
    const std::vector<RouterAction>& schedule, const CostModel& cm) {
  if (task.horizon > 12)
    throw std::invalid_argument(
        "exact_episode_stats: horizon above enumeration guard (12)");
  if (static_cast<int>(schedule.size()) < task.horizon)
    throw std::invalid_argument("exact_episode_stats: schedule too short");
  Enumerator e{cfg, task, schedule, cm};
  e.walk(0, 0, 1.0, 0.0);
  return {e.p_success, e.expected_cost};
}

std::pair<double, double> mc_schedule_stats(
    const EnvConfig& cfg, const Task& task,
    const std::vector<RouterAction>& schedule, const CostModel& cm,
    int episodes, std::uint64_t seed) {
  if (static_cast<int>(schedule.size()) < task.horizon)
    throw std::invalid_argument("mc_schedule_stats: schedule too short");
  long long successes = 0;
  double cost_sum = 0.0;
  int n_crit = static_cast<int>(task.critical_steps.size());
  for (int ep = 0; ep < episodes; ++ep) {
    RngStream rng(derive_seed(seed, "mc_episode", task.task_id,
                              static_cast<std::uint64_t>(ep)));
    int cleared = 0;
    bool failed = false;
    double cost = 0.0;
    for (int step = 0; step < task.horizon; ++step) {
      if (cleared == n_crit && step > 0) break;
      if (failed && cfg.fail_mode == FailMode::terminate_on_fail) break;
      RouterAction a = schedule[static_cast<std::size_t>(step)];
      cost += a == RouterAction::LARGE ? cm.c_large : cm.c_small;
      if (task.is_critical(step)) {
        double q = a == RouterAction::LARGE ? task.p_clear_large
                                            : task.p_clear_small;
        if (rng.u01() < q)
          ++cleared;
        else
          failed = true;
      }
    }
    if (cleared == n_crit && !failed) ++successes;
    cost_sum += cost;
  }
  return {static_cast<double>(successes) / episodes, cost_sum / episodes};
}

}  // namespace routerlab

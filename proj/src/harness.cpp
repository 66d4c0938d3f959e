#include "routerlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace routerlab {

EvalStats evaluate_policy(const EnvConfig& cfg, const CostModel& cm,
                          const PolicySpec& spec,
                          const std::vector<Task>& tasks,
                          int episodes_per_task, std::uint64_t master_seed,
                          int seed_idx) {
  if (tasks.empty()) throw std::invalid_argument("evaluate: no tasks");
  if (episodes_per_task < 1)
    throw std::invalid_argument("evaluate: episodes_per_task < 1");
  long long n = 0, successes = 0;
  double cost_sum = 0.0, large_sum = 0.0;
  for (const Task& task : tasks) {
    for (int ep = 0; ep < episodes_per_task; ++ep) {
      std::uint64_t ep_seed =
          derive_seed(master_seed, "eval_episode", task.task_id,
                      static_cast<std::uint64_t>(seed_idx),
                      static_cast<std::uint64_t>(ep));
      Trajectory t = run_episode(cfg, cm, spec, task, ep_seed);
      ++n;
      if (t.success) ++successes;
      cost_sum += t.total_cost;
      large_sum += t.large_calls;
    }
  }
  EvalStats s;
  s.success_rate = static_cast<double>(successes) / static_cast<double>(n);
  s.avg_cost = cost_sum / static_cast<double>(n);
  s.avg_large_calls = large_sum / static_cast<double>(n);
  return s;
}

namespace {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace

FrontierPoint frontier_point(
    const EnvConfig& cfg, const CostModel& cm, const std::string& method,
    double knob, const std::function<PolicySpec(double, int)>& factory,
    const std::vector<Task>& tasks, int episodes_per_task, int n_seeds,
    std::uint64_t master_seed) {
  if (n_seeds < 1) throw std::invalid_argument("frontier: n_seeds < 1");
  std::vector<double> sr, cost, large;
  for (int s = 0; s < n_seeds; ++s) {
    EvalStats st = evaluate_policy(cfg, cm, factory(knob, s), tasks,
                                   episodes_per_task, master_seed, s);
    sr.push_back(st.success_rate);
    cost.push_back(st.avg_cost);
    large.push_back(st.avg_large_calls);
  }
  FrontierPoint p;
  p.method = method;
  p.knob = knob;
  p.seed_count = n_seeds;
  MeanStderr msr = mean_stderr(sr), mc = mean_stderr(cost),
             ml = mean_stderr(large);
  p.success_rate = msr.mean;
  p.success_stderr = msr.stderr_;
  p.avg_cost = mc.mean;
  p.cost_stderr = mc.stderr_;
  p.avg_large_calls = ml.mean;
  return p;
}

std::vector<FrontierPoint> pareto_filter(
    const std::vector<FrontierPoint>& points) {
  std::vector<FrontierPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      const FrontierPoint& a = points[j];
      const FrontierPoint& b = points[i];
      if (a.success_rate >= b.success_rate && a.avg_cost <= b.avg_cost &&
          (a.success_rate > b.success_rate || a.avg_cost < b.avg_cost))
        dominated = true;
    }
    if (!dominated) out.push_back(points[i]);
  }
  return out;
}

std::vector<HardBudgetRow> hard_budget_eval(
    const EnvConfig& cfg, const CostModel& cm,
    const std::vector<std::pair<std::string,
                                std::function<PolicySpec(int, int)>>>& methods,
    const std::vector<int>& budgets, const std::vector<Task>& tasks,
    int episodes_per_task, int n_seeds, std::uint64_t master_seed) {
  if (n_seeds < 1) throw std::invalid_argument("hard_budget: n_seeds < 1");
  std::vector<HardBudgetRow> rows;
  for (const auto& [name, factory] : methods) {
    for (int k : budgets) {
      if (k < 1) throw std::invalid_argument("hard_budget: budget < 1");
      double sr_sum = 0.0, use_sum = 0.0;
      for (int s = 0; s < n_seeds; ++s) {
        EvalStats st = evaluate_policy(cfg, cm, factory(k, s), tasks,
                                       episodes_per_task, master_seed, s);
        sr_sum += st.success_rate;
        use_sum += 100.0 * st.avg_large_calls / static_cast<double>(k);
      }
      HardBudgetRow row;
      row.method = name;
      row.budget_k = k;
      row.success_rate = sr_sum / n_seeds;
      row.use_pct = use_sum / n_seeds;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<AllocationRow> budget_allocation_report(
    const EnvConfig& cfg, const CostModel& cm, const PolicySpec& spec,
    const std::vector<Task>& tasks,
    const std::map<std::uint64_t, DifficultyLabel>& labels,
    int episodes_per_task, std::uint64_t master_seed, int seed_idx) {
  if (tasks.empty()) throw std::invalid_argument("allocation: no tasks");
  double counts[3] = {0, 0, 0};
  double costs[3] = {0, 0, 0};
  for (const Task& task : tasks) {
    auto li = labels.find(task.task_id);
    if (li == labels.end())
      throw std::invalid_argument("allocation: task without label: " +
                                  std::to_string(task.task_id));
    int bucket = static_cast<int>(li->second);
    for (int ep = 0; ep < episodes_per_task; ++ep) {
      std::uint64_t ep_seed =
          derive_seed(master_seed, "eval_episode", task.task_id,
                      static_cast<std::uint64_t>(seed_idx),
                      static_cast<std::uint64_t>(ep));
      Trajectory t = run_episode(cfg, cm, spec, task, ep_seed);
      counts[bucket] += 1.0;
      costs[bucket] += t.total_cost;
    }
  }
  double count_total = counts[0] + counts[1] + counts[2];
  double cost_total = costs[0] + costs[1] + costs[2];
  std::vector<AllocationRow> rows;
  for (DifficultyLabel label : {DifficultyLabel::easy, DifficultyLabel::hard,
                                DifficultyLabel::intractable}) {
    AllocationRow row;
    row.label = label_name(label);
    int b = static_cast<int>(label);
    row.count_share = count_total > 0 ? counts[b] / count_total : 0.0;
    row.cost_share = cost_total > 0 ? costs[b] / cost_total : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::uint64_t count_feasible_sequences(int horizon, int max_large_calls) {
  if (horizon < 0 || horizon > 62)
    throw std::invalid_argument(
        "count_feasible_sequences: horizon outside [0, 62]");
  if (max_large_calls < 0)
    throw std::invalid_argument("count_feasible_sequences: negative cap");
  int cap = std::min(max_large_calls, horizon);
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(horizon, 0)
  for (int j = 0; j <= cap; ++j) {
    total += binom;
    // C(T, j+1) = C(T, j) * (T - j) / (j + 1); exact while T <= 62
    binom = binom * static_cast<std::uint64_t>(horizon - j) /
            static_cast<std::uint64_t>(j + 1);
  }
  return total;
}

}  // namespace routerlab

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/decoding.hpp"
#include "routerlab/env.hpp"
#include "routerlab/taxonomy.hpp"

namespace routerlab {

struct EvalStats {
  double success_rate = 0.0;
  double avg_cost = 0.0;
  double avg_large_calls = 0.0;
};

// Evaluates a policy on every task. Episode streams are keyed by
// (master seed, task, eval seed, episode index) and never by the method, so
// competing policies face identical environment randomness (common random
// numbers; the frontier comparisons run at much lower variance).
EvalStats evaluate_policy(const EnvConfig& cfg, const CostModel& cm,
                          const PolicySpec& spec,
                          const std::vector<Task>& tasks,
                          int episodes_per_task, std::uint64_t master_seed,
                          int seed_idx);

struct FrontierPoint {
  std::string method;
  double knob = 0.0;  // method parameter (mix rate, lambda, threshold...)
  int seed_count = 0;
  double success_rate = 0.0;    // mean over eval seeds
  double success_stderr = 0.0;  // stderr of the per-seed means
  double avg_cost = 0.0;
  double cost_stderr = 0.0;
  double avg_large_calls = 0.0;
};

// One frontier point: the policy factory may return a different spec per
// eval seed (learned routers have per-seed checkpoints).
FrontierPoint frontier_point(
    const EnvConfig& cfg, const CostModel& cm, const std::string& method,
    double knob, const std::function<PolicySpec(double, int)>& factory,
    const std::vector<Task>& tasks, int episodes_per_task, int n_seeds,
    std::uint64_t master_seed);

// Non-dominated subset (maximize success rate, minimize cost), input order
// preserved. Ties survive unless strictly beaten on one axis.
std::vector<FrontierPoint> pareto_filter(
    const std::vector<FrontierPoint>& points);

struct HardBudgetRow {
  std::string method;
  int budget_k = 0;
  double success_rate = 0.0;
  double use_pct = 0.0;  // 100 * mean large calls / K
};

// Capped-budget table: every method is evaluated at each budget K. Factories
// decide whether to honor the cap (budgeted specs) or ignore it (the
// unconstrained topline, whose use_pct then exceeds 100).
std::vector<HardBudgetRow> hard_budget_eval(
    const EnvConfig& cfg, const CostModel& cm,
    const std::vector<std::pair<std::string,
                                std::function<PolicySpec(int, int)>>>& methods,
    const std::vector<int>& budgets, const std::vector<Task>& tasks,
    int episodes_per_task, int n_seeds, std::uint64_t master_seed);

struct AllocationRow {
  std::string label;
  double count_share = 0.0;  // fraction of evaluated episodes
  double cost_share = 0.0;   // fraction of total spend
};

// Where the money goes, by difficulty label. Rows in easy/hard/intractable
// order; shares are zero-filled for absent labels.
std::vector<AllocationRow> budget_allocation_report(
    const EnvConfig& cfg, const CostModel& cm, const PolicySpec& spec,
    const std::vector<Task>& tasks,
    const std::map<std::uint64_t, DifficultyLabel>& labels,
    int episodes_per_task, std::uint64_t master_seed, int seed_idx = 0);

// Number of action sequences over T steps with at most K large calls:
// sum_{j<=K} C(T, j). Exact in 64 bits for T <= 62.
std::uint64_t count_feasible_sequences(int horizon, int max_large_calls);

}  // namespace routerlab

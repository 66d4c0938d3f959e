#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "routerlab/budget.hpp"
#include "routerlab/env.hpp"
#include "routerlab/policy.hpp"

namespace routerlab {

enum class PolicyKind {
  always_small,
  always_large,
  random_p,
  first_large,
  cascade,
  single_turn,
  learned,
  schedule,  // fixed per-step actions, used by oracles and tests
};

// One routing policy plus an optional hard budget. With a budget attached,
// budget-constrained decoding masks the LARGE action whenever the next large
// call is unaffordable; everything else is untouched.
struct PolicySpec {
  PolicyKind kind = PolicyKind::always_small;
  double random_p = 0.0;
  int first_large_k = 0;
  double cascade_threshold = 0.0;
  RouterParams params;  // learned / single_turn
  std::vector<RouterAction> schedule;
  std::optional<double> budget_max;
  BudgetUnit budget_unit = BudgetUnit::large_calls;
};

PolicySpec always_small_policy();
PolicySpec always_large_policy();
PolicySpec random_p_policy(double p);
PolicySpec first_large_policy(int k);
PolicySpec cascade_policy(double threshold);
PolicySpec single_turn_policy(const RouterParams& params);
PolicySpec learned_policy(const RouterParams& params);
PolicySpec schedule_policy(std::vector<RouterAction> actions);
PolicySpec with_budget(PolicySpec spec, double b_max, BudgetUnit unit);

// Returns 0 (LARGE pruned) when the price of one large call reaches the
// remaining budget. Money budgets follow the printed rule (prune at
// c_large >= remaining); call-count budgets prune only when the call would
// overshoot the cap, so a budget of K calls allows exactly K.
double bcd_filter(double base_prob_large, const BudgetState& budget,
                  double c_large);

// Base routing probability before any budget mask. Needs the env config for
// the cascade confidence proxy.
double base_prob(const EnvConfig& cfg, const PolicySpec& spec,
                 const Task& task, const EpisodeState& st,
                 const BudgetState* budget);

Trajectory run_episode(const EnvConfig& cfg, const CostModel& cm,
                       const PolicySpec& spec, const Task& task,
                       std::uint64_t episode_seed);

// run_episode plus per-decision features and log-probs, for training and
// behavior probes. Only meaningful for stochastic feature-based specs.
struct TracedEpisode {
  Trajectory traj;
  std::vector<FeatureVector> features;
  std::vector<double> logp;        // log prob of the taken action
  std::vector<double> prob_large;  // P(LARGE) at each decision
};

TracedEpisode run_learned_episode(const EnvConfig& cfg, const CostModel& cm,
                                  const RouterParams& params, const Task& task,
                                  std::uint64_t episode_seed);

// Offline classifier for the single-turn baseline: step-level logistic fit
// where the target is LARGE iff the step is critical and the task's small
// clear prob is below `usefulness_cutoff`.
RouterParams train_single_turn(const EnvConfig& cfg, const CostModel& cm,
                               const std::vector<Task>& tasks,
                               double usefulness_cutoff, std::uint64_t seed);

}  // namespace routerlab

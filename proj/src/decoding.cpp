#include "routerlab/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace routerlab {

PolicySpec always_small_policy() { return {}; }

PolicySpec always_large_policy() {
  PolicySpec s;
  s.kind = PolicyKind::always_large;
  return s;
}

PolicySpec random_p_policy(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("random_p outside [0,1]");
  PolicySpec s;
  s.kind = PolicyKind::random_p;
  s.random_p = p;
  return s;
}

PolicySpec first_large_policy(int k) {
  if (k < 0) throw std::invalid_argument("first_large k < 0");
  PolicySpec s;
  s.kind = PolicyKind::first_large;
  s.first_large_k = k;
  return s;
}

PolicySpec cascade_policy(double threshold) {
  PolicySpec s;
  s.kind = PolicyKind::cascade;
  s.cascade_threshold = threshold;
  return s;
}

PolicySpec single_turn_policy(const RouterParams& params) {
  PolicySpec s;
  s.kind = PolicyKind::single_turn;
  s.params = params;
  return s;
}

PolicySpec learned_policy(const RouterParams& params) {
  PolicySpec s;
  s.kind = PolicyKind::learned;
  s.params = params;
  return s;
}

PolicySpec schedule_policy(std::vector<RouterAction> actions) {
  PolicySpec s;
  s.kind = PolicyKind::schedule;
  s.schedule = std::move(actions);
  return s;
}

PolicySpec with_budget(PolicySpec spec, double b_max, BudgetUnit unit) {
  spec.budget_max = b_max;
  spec.budget_unit = unit;
  return spec;
}

double bcd_filter(double base_prob_large, const BudgetState& budget,
                  double c_large) {
  double rem = budget.remaining();
  bool prune = budget.unit == BudgetUnit::money ? c_large >= rem
                                                : c_large > rem;
  return prune ? 0.0 : base_prob_large;
}

double base_prob(const EnvConfig& cfg, const PolicySpec& spec,
                 const Task& task, const EpisodeState& st,
                 const BudgetState* budget) {
  switch (spec.kind) {
    case PolicyKind::always_small:
      return 0.0;
    case PolicyKind::always_large:
      return 1.0;
    case PolicyKind::random_p:
      return spec.random_p;
    case PolicyKind::first_large:
      return st.current_step < spec.first_large_k ? 1.0 : 0.0;
    case PolicyKind::cascade: {
      // confidence: 1 when the small model shows no struggle, else reduced
      // by the quality gap between the two models
      double gap = std::clamp(cfg.q_large - cfg.q_small, 0.0, 1.0);
      double confidence = st.struggle ? 1.0 - gap : 1.0;
      return confidence < spec.cascade_threshold ? 1.0 : 0.0;
    }
    case PolicyKind::single_turn: {
      FeatureVector f = observe(cfg, task, st, budget);
      return prob_large(spec.params, f) > 0.5 ? 1.0 : 0.0;
    }
    case PolicyKind::learned: {
      FeatureVector f = observe(cfg, task, st, budget);
      return prob_large(spec.params, f);
    }
    case PolicyKind::schedule: {
      auto i = static_cast<std::size_t>(st.current_step);
      if (i >= spec.schedule.size())
        throw std::invalid_argument("schedule shorter than episode");
      return spec.schedule[i] == RouterAction::LARGE ? 1.0 : 0.0;
    }
  }
  throw std::logic_error("unreachable policy kind");
}

Trajectory run_episode(const EnvConfig& cfg, const CostModel& cm,
                       const PolicySpec& spec, const Task& task,
                       std::uint64_t episode_seed) {
  RngStream rng(episode_seed);
  EpisodeState st = reset_episode(cfg, task, rng);
  BudgetState budget;
  const bool budgeted = spec.budget_max.has_value();
  if (budgeted) {
    budget.b_max = *spec.budget_max;
    budget.unit = spec.budget_unit;
  }
  while (!episode_terminated(cfg, task, st)) {
    double p = base_prob(cfg, spec, task, st, budgeted ? &budget : nullptr);
    if (budgeted) {
      double price =
          budget.unit == BudgetUnit::money ? cm.c_large : 1.0;
      p = bcd_filter(p, budget, price);
    }
    // one action draw per decision, even for deterministic policies, so a
    // budget wrapper never shifts the env randomness
    RouterAction a =
        rng.u01() < p ? RouterAction::LARGE : RouterAction::SMALL;
    StepRecord rec = env_step(cfg, task, st, a, cm, rng);
    if (budgeted)
      budget.spent += budget.unit == BudgetUnit::money
                          ? rec.cost
                          : (a == RouterAction::LARGE ? 1.0 : 0.0);
  }
  return finalize_trajectory(task, st, episode_seed);
}

TracedEpisode run_learned_episode(const EnvConfig& cfg, const CostModel& cm,
                                  const RouterParams& params, const Task& task,
                                  std::uint64_t episode_seed) {
  RngStream rng(episode_seed);
  EpisodeState st = reset_episode(cfg, task, rng);
  TracedEpisode out;
  while (!episode_terminated(cfg, task, st)) {
    FeatureVector f = observe(cfg, task, st);
    double p = prob_large(params, f);
    RouterAction a =
        rng.u01() < p ? RouterAction::LARGE : RouterAction::SMALL;
    out.features.push_back(f);
    out.prob_large.push_back(p);
    out.logp.push_back(a == RouterAction::LARGE ? std::log(p)
                                                : std::log1p(-p));
    env_step(cfg, task, st, a, cm, rng);
  }
  out.traj = finalize_trajectory(task, st, episode_seed);
  return out;
}

RouterParams train_single_turn(const EnvConfig& cfg, const CostModel& cm,
                               const std::vector<Task>& tasks,
                               double usefulness_cutoff, std::uint64_t seed) {
  // collect step-level examples under a coin-flip behavior policy
  std::vector<FeatureVector> xs;
  std::vector<RouterAction> ys;
  for (const Task& task : tasks) {
    for (int rep = 0; rep < 2; ++rep) {
      std::uint64_t ep_seed = derive_seed(seed, "single_turn_data",
                                          task.task_id,
                                          static_cast<std::uint64_t>(rep));
      RngStream rng(ep_seed);
      EpisodeState st = reset_episode(cfg, task, rng);
      while (!episode_terminated(cfg, task, st)) {
        xs.push_back(observe(cfg, task, st));
        bool want_large = task.is_critical(st.current_step) &&
                          task.p_clear_small < usefulness_cutoff;
        ys.push_back(want_large ? RouterAction::LARGE : RouterAction::SMALL);
        RouterAction a = rng.u01() < 0.5 ? RouterAction::LARGE
                                         : RouterAction::SMALL;
        env_step(cfg, task, st, a, cm, rng);
      }
    }
  }
  RouterParams params;
  if (xs.empty()) return params;
  const double lr = 0.5;
  const int iters = 400;
  for (int it = 0; it < iters; ++it) {
    FeatureVector g{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      LogProbGrad lg = logprob_and_grad(params, xs[i], ys[i]);
      for (int d = 0; d < kFeatureDim; ++d) g[d] += lg.grad[d];
    }
    for (int d = 0; d < kFeatureDim; ++d)
      params.weights[d] += lr * g[d] / static_cast<double>(xs.size());
  }
  return params;
}

}  // namespace routerlab

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "routerlab/harness.hpp"
#include "routerlab/rng.hpp"

using namespace routerlab;

namespace {

FrontierPoint point(double sr, double cost) {
  FrontierPoint p;
  p.success_rate = sr;
  p.avg_cost = cost;
  return p;
}

// quadratic-time dominance oracle: p is dominated iff someone is at least
// as good on both axes and strictly better on one
bool dominated(const FrontierPoint& p, const std::vector<FrontierPoint>& all) {
  for (const FrontierPoint& q : all) {
    if (&q == &p) continue;
    bool geq = q.success_rate >= p.success_rate && q.avg_cost <= p.avg_cost;
    bool strict =
        q.success_rate > p.success_rate || q.avg_cost < p.avg_cost;
    if (geq && strict) return true;
  }
  return false;
}

// tasks whose single critical step can never be cleared: every episode runs
// the full horizon and the action sequence is entirely policy-driven
Task stuck_task(std::uint64_t id, int horizon) {
  Task t;
  t.task_id = id;
  t.horizon = horizon;
  t.critical_steps = {0};
  t.p_clear_small = 0.0;
  t.p_clear_large = 0.0;
  return t;
}

Task free_task(std::uint64_t id, int horizon) {
  Task t;
  t.task_id = id;
  t.horizon = horizon;
  return t;  // no critical steps: one-step vacuous success
}

EnvConfig plain_env(int horizon) {
  EnvConfig cfg;
  cfg.horizon = horizon;
  cfg.n_critical_max = 1;
  cfg.hint_noise = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("pareto filter keeps exactly the non-dominated points") {
  std::vector<FrontierPoint> single = {point(0.5, 3.0)};
  CHECK(pareto_filter(single).size() == 1);

  std::vector<FrontierPoint> two = {point(0.6, 2.0), point(0.5, 3.0)};
  auto kept = pareto_filter(two);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].success_rate == 0.6);

  // exact duplicates tie and both survive
  std::vector<FrontierPoint> dup = {point(0.4, 1.0), point(0.4, 1.0)};
  CHECK(pareto_filter(dup).size() == 2);

  RngStream rng(2024);
  std::vector<FrontierPoint> cloud;
  for (int i = 0; i < 60; ++i)
    cloud.push_back(point(rng.u01(), 1.0 + 9.0 * rng.u01()));
  auto front = pareto_filter(cloud);
  REQUIRE(!front.empty());
  std::size_t cursor = 0;
  for (const FrontierPoint& p : cloud) {
    bool kept_p = cursor < front.size() &&
                  front[cursor].success_rate == p.success_rate &&
                  front[cursor].avg_cost == p.avg_cost;
    if (kept_p) ++cursor;  // output must be an order-preserving subsequence
    CHECK(kept_p == !dominated(p, cloud));
  }
  CHECK(cursor == front.size());
}

TEST_CASE("feasible sequence counts match exhaustive enumeration") {
  for (int t = 0; t <= 12; ++t) {
    for (int k = 0; k <= t; ++k) {
      std::uint64_t brute = 0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << t); ++mask)
        if (std::popcount(mask) <= k) ++brute;
      CHECK(count_feasible_sequences(t, k) == brute);
    }
  }
  CHECK(count_feasible_sequences(0, 0) == 1);
  CHECK(count_feasible_sequences(3, 1) == 4);
  CHECK(count_feasible_sequences(10, 10) == 1024);
  CHECK(count_feasible_sequences(62, 62) == (std::uint64_t{1} << 62));
  CHECK_THROWS_AS(count_feasible_sequences(63, 3), std::invalid_argument);
  CHECK_THROWS_AS(count_feasible_sequences(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(count_feasible_sequences(5, -1), std::invalid_argument);
  // a cap beyond the horizon saturates instead of overflowing the binomial
  CHECK(count_feasible_sequences(4, 9) == 16);
}

TEST_CASE("evaluate_policy is exact on trivial tasks and replays bitwise") {
  EnvConfig cfg = plain_env(8);
  CostModel cm;
  std::vector<Task> tasks = {free_task(0, 8), free_task(1, 8)};
  EvalStats st =
      evaluate_policy(cfg, cm, always_small_policy(), tasks, 25, 99, 0);
  CHECK(st.success_rate == 1.0);  // vacuous success, one small step
  CHECK(st.avg_cost == doctest::Approx(cm.c_small).epsilon(1e-12));
  CHECK(st.avg_large_calls == 0.0);

  std::vector<Task> mixed = {stuck_task(0, 6), free_task(1, 6)};
  EvalStats a = evaluate_policy(cfg, cm, random_p_policy(0.4), mixed, 50, 7, 2);
  EvalStats b = evaluate_policy(cfg, cm, random_p_policy(0.4), mixed, 50, 7, 2);
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.avg_cost == b.avg_cost);
  CHECK(a.avg_large_calls == b.avg_large_calls);
  EvalStats c = evaluate_policy(cfg, cm, random_p_policy(0.4), mixed, 50, 7, 3);
  CHECK(a.avg_cost != c.avg_cost);  // different eval seed, different draws
}

TEST_CASE("frontier points aggregate per-seed evaluations exactly") {
  EnvConfig cfg = plain_env(6);
  cfg.q_small = 0.6;
  cfg.q_large = 0.95;
  CostModel cm;
  std::vector<Task> tasks;
  for (std::uint64_t id = 0; id < 10; ++id)
    tasks.push_back(generate_task(cfg, 31, id));

  const int n_seeds = 3, episodes = 20;
  const std::uint64_t master = 17;
  auto factory = [](double knob, int) { return random_p_policy(knob); };
  FrontierPoint fp = frontier_point(cfg, cm, "random_p", 0.3, factory, tasks,
                                    episodes, n_seeds, master);
  CHECK(fp.method == "random_p");
  CHECK(fp.knob == 0.3);
  CHECK(fp.seed_count == n_seeds);

  double sr_sum = 0.0, cost_sum = 0.0;
  std::vector<double> seed_sr, seed_cost;
  for (int s = 0; s < n_seeds; ++s) {
    EvalStats st = evaluate_policy(cfg, cm, random_p_policy(0.3), tasks,
                                   episodes, master, s);
    seed_sr.push_back(st.success_rate);
    seed_cost.push_back(st.avg_cost);
    sr_sum += st.success_rate;
    cost_sum += st.avg_cost;
  }
  CHECK(fp.success_rate == doctest::Approx(sr_sum / 3.0).epsilon(1e-12));
  CHECK(fp.avg_cost == doctest::Approx(cost_sum / 3.0).epsilon(1e-12));

  auto stderr_of = [](const std::vector<double>& xs) {
    double mu = 0.0;
    for (double x : xs) mu += x;
    mu /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mu) * (x - mu);
    var /= static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
  };
  CHECK(fp.success_stderr ==
        doctest::Approx(stderr_of(seed_sr)).epsilon(1e-9));
  CHECK(fp.cost_stderr == doctest::Approx(stderr_of(seed_cost)).epsilon(1e-9));

  FrontierPoint one = frontier_point(cfg, cm, "random_p", 0.3, factory, tasks,
                                     episodes, 1, master);
  CHECK(one.success_stderr == 0.0);
  CHECK(one.cost_stderr == 0.0);
}

TEST_CASE("hard budget table reports exact utilization at the edges") {
  EnvConfig cfg = plain_env(20);
  CostModel cm;
  std::vector<Task> tasks = {stuck_task(0, 20), stuck_task(1, 20)};
  std::vector<std::pair<std::string, std::function<PolicySpec(int, int)>>>
      methods = {
          {"always_small", [](int, int) { return always_small_policy(); }},
          {"always_large_bcd",
           [](int k, int) {
             return with_budget(always_large_policy(), k,
                                BudgetUnit::large_calls);
           }},
      };
  std::vector<int> budgets = {3, 5};
  auto rows =
      hard_budget_eval(cfg, cm, methods, budgets, tasks, 10, 2, 555);
  REQUIRE(rows.size() == methods.size() * budgets.size());
  for (const auto& row : rows) {
    if (row.method == "always_small") {
      CHECK(row.use_pct == 0.0);  // never touches the large model
    } else {
      // stuck tasks run the full horizon, so a capped always-large policy
      // spends exactly its whole allowance
      CHECK(row.use_pct == doctest::Approx(100.0).epsilon(1e-12));
      CHECK(row.success_rate == 0.0);
    }
    CHECK((row.budget_k == 3 || row.budget_k == 5));
  }
}

TEST_CASE("allocation report splits spend by difficulty label") {
  EnvConfig cfg = plain_env(20);
  CostModel cm;
  // one free task (1 small step, cost 0.4) and two stuck ones (20 small
  // steps, cost 8.0 each) under an all-small policy
  std::vector<Task> tasks = {free_task(0, 20), stuck_task(1, 20),
                             stuck_task(2, 20)};
  std::map<std::uint64_t, DifficultyLabel> labels = {
      {0, DifficultyLabel::easy},
      {1, DifficultyLabel::hard},
      {2, DifficultyLabel::hard}};
  auto rows = budget_allocation_report(cfg, cm, always_small_policy(), tasks,
                                       labels, 5, 77);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "easy");
  CHECK(rows[1].label == "hard");
  CHECK(rows[2].label == "intractable");
  CHECK(rows[0].count_share == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(rows[1].count_share == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(rows[2].count_share == 0.0);
  CHECK(rows[0].cost_share == doctest::Approx(0.4 / 16.4).epsilon(1e-9));
  CHECK(rows[1].cost_share == doctest::Approx(16.0 / 16.4).epsilon(1e-9));
  double count_total = 0.0, cost_total = 0.0;
  for (const auto& r : rows) {
    count_total += r.count_share;
    cost_total += r.cost_share;
  }
  CHECK(count_total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cost_total == doctest::Approx(1.0).epsilon(1e-9));

  // single-label degenerate case
  std::map<std::uint64_t, DifficultyLabel> all_easy = {
      {0, DifficultyLabel::easy}};
  auto solo = budget_allocation_report(cfg, cm, always_small_policy(),
                                       {free_task(0, 20)}, all_easy, 5, 77);
  CHECK(solo[0].count_share == doctest::Approx(1.0));
  CHECK(solo[0].cost_share == doctest::Approx(1.0));

  std::map<std::uint64_t, DifficultyLabel> missing;  // task 0 unlabeled
  CHECK_THROWS_AS(budget_allocation_report(cfg, cm, always_small_policy(),
                                           {free_task(0, 20)}, missing, 5, 77),
                  std::invalid_argument);
}

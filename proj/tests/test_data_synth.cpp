#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "routerlab/data_synth.hpp"
#include "routerlab/rng.hpp"

using namespace routerlab;

namespace {

Task stuck(int horizon) {
  Task t;
  t.task_id = 500;
  t.horizon = horizon;
  t.critical_steps = {0};
  t.p_clear_small = 0.0;
  t.p_clear_large = 0.0;
  return t;
}

Trajectory fake(bool success, double cost, int large_calls) {
  Trajectory t;
  t.success = success;
  t.total_cost = cost;
  t.large_calls = large_calls;
  return t;
}

}  // namespace

TEST_CASE("stratified rollouts sweep the mixing probability") {
  EnvConfig cfg;
  cfg.horizon = 20;
  CostModel cm;
  Task t = stuck(20);  // full-horizon episodes, so step counts are fixed
  auto rollouts = stratified_rollouts(cfg, cm, t, 20, 99);
  REQUIRE(rollouts.size() == 20);
  // the k = N level has P(LARGE) = 1
  CHECK(rollouts.back().large_calls == 20);

  // rerun is bit-identical
  auto again = stratified_rollouts(cfg, cm, t, 20, 99);
  for (std::size_t i = 0; i < rollouts.size(); ++i)
    REQUIRE(rollouts[i].total_cost == again[i].total_cost);

  // the mid level mixes at one half
  long larges = 0, steps = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    auto rs = stratified_rollouts(cfg, cm, t, 2, s);
    larges += rs[0].large_calls;  // k=1 of 2 -> p = 0.5
    steps += static_cast<long>(rs[0].records.size());
  }
  double frac = static_cast<double>(larges) / static_cast<double>(steps);
  CHECK(std::abs(frac - 0.5) < 4.0 * std::sqrt(0.25 / steps));

  CHECK(stratified_rollouts(cfg, cm, t, 1, 5).size() == 1);
  CHECK_THROWS_AS(stratified_rollouts(cfg, cm, t, 0, 5),
                  std::invalid_argument);
}

TEST_CASE("select_expert picks min cost with documented tie-breaks") {
  CHECK_FALSE(select_expert({}).has_value());
  CHECK_FALSE(select_expert({fake(false, 1.0, 0), fake(false, 0.5, 1)})
                  .has_value());

  auto best = select_expert(
      {fake(true, 5.2, 3), fake(true, 3.1, 1), fake(true, 4.0, 2)});
  REQUIRE(best.has_value());
  CHECK(*best == 1);

  // cost tie: fewer large calls wins
  auto tie1 = select_expert({fake(true, 3.0, 4), fake(true, 3.0, 2)});
  CHECK(*tie1 == 1);

  // full tie: earliest index wins
  auto tie2 = select_expert(
      {fake(false, 1.0, 0), fake(true, 3.0, 2), fake(true, 3.0, 2)});
  CHECK(*tie2 == 1);

  // failures never win, however cheap
  auto sel = select_expert({fake(false, 0.1, 0), fake(true, 9.0, 5)});
  CHECK(*sel == 1);
}

TEST_CASE("expert cost is minimal among its successful inputs") {
  EnvConfig cfg;
  cfg.horizon = 10;
  cfg.q_small = 0.4;
  cfg.q_large = 0.95;
  CostModel cm;
  Task t;
  t.task_id = 7;
  t.horizon = 10;
  t.critical_steps = {2, 6};
  t.p_clear_small = 0.4;
  t.p_clear_large = 0.95;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto rollouts = stratified_rollouts(cfg, cm, t, 12, seed);
    auto pick = select_expert(rollouts);
    if (!pick) continue;
    for (const auto& r : rollouts)
      if (r.success) REQUIRE(rollouts[*pick].total_cost <= r.total_cost);
  }
}

TEST_CASE("synthesis assigns sources by label") {
  CostModel cm;

  // easy environment: small model always clears
  EnvConfig easy_cfg;
  easy_cfg.horizon = 8;
  easy_cfg.q_small = 1.0;
  easy_cfg.q_large = 1.0;
  easy_cfg.intractable_fraction = 0.0;
  easy_cfg.n_critical_min = 1;
  easy_cfg.n_critical_max = 2;
  std::vector<Task> tasks;
  std::vector<DifficultyProfile> profiles;
  for (std::uint64_t id = 0; id < 5; ++id) {
    tasks.push_back(generate_task(easy_cfg, 3, id));
    profiles.push_back(profile_task(easy_cfg, cm, tasks.back(), 5, 3));
  }
  SynthesisResult easy = synthesize_experts(easy_cfg, cm, tasks, profiles,
                                            10, 3);
  REQUIRE(easy.experts.size() == 5);
  CHECK(easy.dropped_hard.empty());
  for (const auto& e : easy.experts) {
    CHECK(e.label == DifficultyLabel::easy);
    CHECK(e.source == "small_boundary");
    CHECK(e.traj.large_calls == 0);
    CHECK(e.traj.success);
  }

  // hard environment: only the large model clears
  EnvConfig hard_cfg = easy_cfg;
  hard_cfg.q_small = 0.0;
  hard_cfg.q_large = 1.0;
  tasks.clear();
  profiles.clear();
  for (std::uint64_t id = 0; id < 5; ++id) {
    tasks.push_back(generate_task(hard_cfg, 4, id));
    profiles.push_back(profile_task(hard_cfg, cm, tasks.back(), 5, 4));
  }
  SynthesisResult hard = synthesize_experts(hard_cfg, cm, tasks, profiles,
                                            10, 4);
  for (const auto& e : hard.experts) {
    CHECK(e.label == DifficultyLabel::hard);
    CHECK(e.source == "stratified");
    CHECK(e.traj.success);  // hard experts must have worked
    CHECK(e.traj.large_calls >= 1);
  }
  CHECK(hard.experts.size() + hard.dropped_hard.size() == 5);

  // intractable environment: nothing ever clears
  EnvConfig dead_cfg = easy_cfg;
  dead_cfg.q_small = 0.0;
  dead_cfg.q_large = 0.0;
  tasks.clear();
  profiles.clear();
  for (std::uint64_t id = 0; id < 5; ++id) {
    tasks.push_back(generate_task(dead_cfg, 5, id));
    profiles.push_back(profile_task(dead_cfg, cm, tasks.back(), 5, 5));
  }
  SynthesisResult dead = synthesize_experts(dead_cfg, cm, tasks, profiles,
                                            10, 5);
  REQUIRE(dead.experts.size() == 5);  // kept: they teach failing cheaply
  for (const auto& e : dead.experts) {
    CHECK(e.label == DifficultyLabel::intractable);
    CHECK(e.source == "small_boundary");
    CHECK(e.traj.large_calls == 0);
    CHECK_FALSE(e.traj.success);
  }
}

TEST_CASE("synthesis validates its profile inputs") {
  EnvConfig cfg;
  CostModel cm;
  std::vector<Task> tasks = {generate_task(cfg, 1, 0)};
  CHECK_THROWS_AS(synthesize_experts(cfg, cm, tasks, {}, 10, 1),
                  std::invalid_argument);
  auto p = profile_task(cfg, cm, tasks[0], 3, 1);
  std::vector<DifficultyProfile> dup = {p, p};
  CHECK_THROWS_AS(synthesize_experts(cfg, cm, tasks, dup, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("unroll_expert re-derives exactly the features the router saw") {
  EnvConfig cfg;
  cfg.horizon = 16;
  cfg.q_small = 0.5;
  cfg.q_large = 0.9;
  cfg.n_critical_min = 2;
  cfg.n_critical_max = 4;
  CostModel cm;
  RouterParams params;
  params.weights = {0.2, -0.5, 1.0, 0.3, -0.2, 0.0, 0.0};
  for (std::uint64_t id = 0; id < 10; ++id) {
    Task t = generate_task(cfg, 88, id);
    TracedEpisode te = run_learned_episode(cfg, cm, params, t, 1000 + id);
    ExpertRecord rec;
    rec.task_id = t.task_id;
    rec.label = DifficultyLabel::hard;
    rec.source = "stratified";
    rec.traj = te.traj;
    auto examples = unroll_expert(cfg, t, rec);
    REQUIRE(examples.size() == te.features.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
      REQUIRE(examples[i].action == te.traj.records[i].action);
      for (int d = 0; d < kFeatureDim; ++d)
        REQUIRE(examples[i].features[d] == te.features[i][d]);
    }
  }
}

TEST_CASE("unrolling counts decisions one-to-one with steps") {
  EnvConfig cfg;
  cfg.horizon = 12;
  CostModel cm;
  Task t;
  t.task_id = 2;
  t.horizon = 12;
  t.critical_steps = {0};
  t.p_clear_small = 0.0;
  t.p_clear_large = 0.0;
  // craft a 12-step trajectory with 3 large calls
  std::vector<RouterAction> acts(12, RouterAction::SMALL);
  acts[1] = acts[5] = acts[9] = RouterAction::LARGE;
  Trajectory traj = run_episode(cfg, cm, schedule_policy(acts), t, 6);
  REQUIRE(traj.records.size() == 12);
  REQUIRE(traj.large_calls == 3);
  ExpertRecord rec{t.task_id, DifficultyLabel::hard, "stratified", traj};
  auto examples = unroll_expert(cfg, t, rec);
  CHECK(examples.size() == 12);
  int larges = 0;
  for (const auto& ex : examples)
    if (ex.action == RouterAction::LARGE) ++larges;
  CHECK(larges == 3);
}

TEST_CASE("dataset weights put the requested share on hard decisions") {
  EnvConfig cfg;
  cfg.horizon = 10;
  cfg.q_small = 0.45;
  cfg.q_large = 0.95;
  cfg.intractable_fraction = 0.1;
  cfg.n_critical_min = 1;
  cfg.n_critical_max = 3;
  CostModel cm;
  std::vector<Task> tasks;
  std::vector<DifficultyProfile> profiles;
  for (std::uint64_t id = 0; id < 80; ++id) {
    tasks.push_back(generate_task(cfg, 21, id));
    profiles.push_back(profile_task(cfg, cm, tasks.back(), 5, 21));
  }
  SynthesisResult synth = synthesize_experts(cfg, cm, tasks, profiles, 16, 21);
  SftDataset ds = build_sft_dataset(cfg, tasks, synth.experts, 0.7);
  REQUIRE(ds.hard_examples > 0);
  REQUIRE(ds.other_examples > 0);
  CHECK(ds.examples.size() ==
        static_cast<std::size_t>(ds.hard_examples + ds.other_examples));

  double total = 0.0, hard_mass = 0.0;
  for (const auto& ex : ds.examples) {
    total += ex.weight;
    if (ex.label == DifficultyLabel::hard) hard_mass += ex.weight;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(hard_mass == doctest::Approx(0.7));

  // empirical draw frequency matches the design share
  auto cdf = sampling_cdf(ds);
  REQUIRE(cdf.size() == ds.examples.size());
  CHECK(cdf.back() == 1.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) REQUIRE(cdf[i] >= cdf[i - 1]);
  RngStream rng(77);
  const int n = 100000;
  int hard_draws = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t idx = sample_index(cdf, rng.u01());
    REQUIRE(idx < ds.examples.size());
    if (ds.examples[idx].label == DifficultyLabel::hard) ++hard_draws;
  }
  double share = static_cast<double>(hard_draws) / n;
  CHECK(std::abs(share - 0.7) < 0.02);
}

TEST_CASE("single-class datasets fall back to uniform weights") {
  EnvConfig cfg;
  cfg.horizon = 6;
  cfg.q_small = 1.0;
  cfg.q_large = 1.0;
  cfg.intractable_fraction = 0.0;
  cfg.n_critical_min = 1;
  cfg.n_critical_max = 1;
  CostModel cm;
  std::vector<Task> tasks;
  std::vector<DifficultyProfile> profiles;
  for (std::uint64_t id = 0; id < 6; ++id) {
    tasks.push_back(generate_task(cfg, 9, id));
    profiles.push_back(profile_task(cfg, cm, tasks.back(), 3, 9));
  }
  auto synth = synthesize_experts(cfg, cm, tasks, profiles, 4, 9);
  SftDataset ds = build_sft_dataset(cfg, tasks, synth.experts, 0.7);
  CHECK(ds.hard_examples == 0);
  for (const auto& ex : ds.examples)
    CHECK(ex.weight ==
          doctest::Approx(1.0 / static_cast<double>(ds.examples.size())));
}

TEST_CASE("sample_index maps the unit interval through the cdf") {
  std::vector<double> cdf = {0.25, 0.5, 1.0};
  CHECK(sample_index(cdf, 0.0) == 0);
  CHECK(sample_index(cdf, 0.2499) == 0);
  CHECK(sample_index(cdf, 0.25) == 1);
  CHECK(sample_index(cdf, 0.499) == 1);
  CHECK(sample_index(cdf, 0.5) == 2);
  CHECK(sample_index(cdf, 0.99999) == 2);
}

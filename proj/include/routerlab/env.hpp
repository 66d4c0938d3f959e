#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "routerlab/budget.hpp"
#include "routerlab/costing.hpp"
#include "routerlab/rng.hpp"

namespace routerlab {

enum class RouterAction { SMALL, LARGE };

enum class StepOutcome { cleared, missed, noncritical };

// What happens after a missed critical step: the episode either stops right
// there, or keeps running (and paying) until the horizon. run_to_horizon is
// the default because it reproduces the cost inversions seen when a weak
// model flails until its context runs out.
enum class FailMode { terminate_on_fail, run_to_horizon };

struct EnvConfig {
  int horizon = 20;
  int n_critical_min = 0;
  int n_critical_max = 1;
  double q_small = 0.82;              // per-critical clear prob under SMALL
  double q_large = 0.90;              // per-critical clear prob under LARGE
  double q_large_intractable = 0.02;  // LARGE clear prob on intractable draws
  double intractable_fraction = 0.12;
  double hint_noise = 0.2;  // flip prob of the struggle signal
  FailMode fail_mode = FailMode::run_to_horizon;
  int history_window = 10;

  void validate() const;
};

struct Task {
  std::uint64_t task_id = 0;
  int horizon = 0;
  std::vector<int> critical_steps;  // sorted step indices in [0, horizon)
  bool intractable_draw = false;
  double p_clear_small = 0.0;
  double p_clear_large = 0.0;

  bool is_critical(int step) const;
};

struct StepRecord {
  int step_index = 0;
  RouterAction action = RouterAction::SMALL;
  StepOutcome outcome = StepOutcome::noncritical;
  double cost = 0.0;
  bool struggle_shown = false;  // signal visible when this step was decided
};

struct Trajectory {
  std::uint64_t task_id = 0;
  std::uint64_t seed = 0;  // episode stream seed, recorded for replay
  std::vector<StepRecord> records;
  bool success = false;
  double total_cost = 0.0;
  int large_calls = 0;
};

// Mutable per-episode state. `records` doubles as the trajectory so far and
// as the history window source for observation features.
struct EpisodeState {
  int current_step = 0;
  int cleared_count = 0;
  bool failed = false;
  bool struggle = false;  // noisy "current step is critical" signal
  std::vector<StepRecord> records;
};

constexpr int kFeatureDim = 7;
using FeatureVector = std::array<double, kFeatureDim>;

// order matters: checkpoints carry a hash of this schema
constexpr const char* kFeatureSchema =
    "bias,step_frac,struggle,miss_frac,large_frac,budget_frac,taxonomy_hint";

// Deterministic in (config, seed, id); adding tasks with new ids never
// perturbs existing ones.
Task generate_task(const EnvConfig& cfg, std::uint64_t seed,
                   std::uint64_t task_id);

// Starts an episode: clears state and draws the struggle signal for step 0.
EpisodeState reset_episode(const EnvConfig& cfg, const Task& task,
                           RngStream& rng);

bool episode_terminated(const EnvConfig& cfg, const Task& task,
                        const EpisodeState& st);

// Executes one step. Draw order per step is fixed (clear draw only on
// critical steps, hint draw only when a next step exists), so two policies
// that pick the same actions see identical randomness.
StepRecord env_step(const EnvConfig& cfg, const Task& task, EpisodeState& st,
                    RouterAction action, const CostModel& cm, RngStream& rng);

Trajectory finalize_trajectory(const Task& task, const EpisodeState& st,
                               std::uint64_t episode_seed);

// success = every critical step cleared
bool is_success(const Trajectory& traj, const Task& task);

// Observation features for the router, in kFeatureSchema order.
// budget == nullptr means unbudgeted (budget feature = 1.0).
FeatureVector observe(const EnvConfig& cfg, const Task& task,
                      const EpisodeState& st,
                      const BudgetState* budget = nullptr,
                      double taxonomy_hint = 0.0);

// Exact (success probability, expected cost) for a fixed per-step action
// schedule, by enumerating clear/miss branches. Horizon capped at 12.
std::pair<double, double> exact_episode_stats(
    const EnvConfig& cfg, const Task& task,
    const std::vector<RouterAction>& schedule, const CostModel& cm);

// Monte-Carlo counterpart of exact_episode_stats (lean loop, no records).
std::pair<double, double> mc_schedule_stats(
    const EnvConfig& cfg, const Task& task,
    const std::vector<RouterAction>& schedule, const CostModel& cm,
    int episodes, std::uint64_t seed);

}  // namespace routerlab

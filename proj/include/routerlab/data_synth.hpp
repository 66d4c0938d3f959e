#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/decoding.hpp"
#include "routerlab/env.hpp"
#include "routerlab/taxonomy.hpp"

namespace routerlab {

// One rollout per mixing level k = 1..n_levels, each with P(LARGE) = k/n,
// i.i.d. per step. Sweeping the mix rate is what surfaces cheap successful
// trajectories on tasks where neither boundary policy is cost-optimal.
std::vector<Trajectory> stratified_rollouts(const EnvConfig& cfg,
                                            const CostModel& cm,
                                            const Task& task, int n_levels,
                                            std::uint64_t seed);

// Picks the expert among successful rollouts: lowest total cost, then fewest
// large calls, then earliest index. nullopt when nothing succeeded.
std::optional<std::size_t> select_expert(
    const std::vector<Trajectory>& rollouts);

struct ExpertRecord {
  std::uint64_t task_id = 0;
  DifficultyLabel label = DifficultyLabel::easy;
  std::string source;  // "stratified" or "small_boundary"
  Trajectory traj;
};

struct SynthesisResult {
  std::vector<ExpertRecord> experts;
  std::vector<std::uint64_t> dropped_hard;  // hard tasks with no success
};

// Expert per task. Easy/intractable tasks get an all-small trajectory lifted
// from their profiling runs; hard tasks get the cheapest successful
// stratified rollout, or are dropped when all n_levels rollouts fail.
SynthesisResult synthesize_experts(const EnvConfig& cfg, const CostModel& cm,
                                   const std::vector<Task>& tasks,
                                   const std::vector<DifficultyProfile>& profiles,
                                   int n_levels, std::uint64_t seed);

struct SftExample {
  std::uint64_t task_id = 0;
  DifficultyLabel label = DifficultyLabel::easy;
  FeatureVector features{};
  RouterAction action = RouterAction::SMALL;
  double weight = 0.0;  // sampling weight, dataset-normalized
};

struct SftDataset {
  std::vector<SftExample> examples;
  int hard_examples = 0;
  int other_examples = 0;
};

// Replays a recorded trajectory step by step and re-derives the observation
// the router saw at each decision. Weights are left at zero here.
std::vector<SftExample> unroll_expert(const EnvConfig& cfg, const Task& task,
                                      const ExpertRecord& rec);

// Decision-level dataset over all experts. Sampling weights are set so an
// i.i.d. draw lands on a hard-task decision with probability hard_share
// (uniform fallback when either side is empty).
SftDataset build_sft_dataset(const EnvConfig& cfg,
                             const std::vector<Task>& tasks,
                             const std::vector<ExpertRecord>& experts,
                             double hard_share);

// Cumulative sampling distribution over dataset examples; final entry is 1.
std::vector<double> sampling_cdf(const SftDataset& ds);

// Maps u in [0,1) to an example index via the cdf.
std::size_t sample_index(const std::vector<double>& cdf, double u);

}  // namespace routerlab

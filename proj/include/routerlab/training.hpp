#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/data_synth.hpp"
#include "routerlab/decoding.hpp"
#include "routerlab/env.hpp"
#include "routerlab/policy.hpp"
#include "routerlab/taxonomy.hpp"

namespace routerlab {

struct RewardConfig {
  double success = 1.0;      // paid on success, any difficulty
  double hard_bonus = 0.5;   // extra on hard-task success
  double lambda = 0.3;       // cost penalty weight
  double epsilon_norm = 1e-6;
  double epsilon_adv = 1e-8;
};

// boundary_relative: cost enters normalized against the per-task boundary
// band, so the penalty is comparable across tasks. vanilla_raw is the
// ablation: success minus lambda times raw cost, no hard bonus.
enum class RewardScheme { boundary_relative, vanilla_raw };

struct BopoConfig {
  int group_size = 8;
  double beta_kl = 0.04;
  double learning_rate = 1e-6;  // reference full-scale setting; configs
                                // override with rates sized to this policy
  double sft_learning_rate = 2e-5;
  double ratio_clip = 0.2;
  int iterations = 200;
  int tasks_per_batch = 16;  // tasks drawn uniformly per iteration
  int sft_iterations = 400;
  int sft_batch_size = 64;
  RewardScheme reward_scheme = RewardScheme::boundary_relative;
  bool use_reference = true;  // baseline = max(group mean, expert reward)
  double divergence_guard = 1e6;

  void validate() const;
};

struct TrainDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// (success payoff + hard bonus) - lambda * normalized cost
double boundary_relative_reward(const Trajectory& traj, DifficultyLabel label,
                                const CostBoundaries& bounds,
                                const RewardConfig& rcfg);

// success payoff - lambda * raw cost
double vanilla_reward(const Trajectory& traj, const RewardConfig& rcfg);

// Group-relative advantages. Baseline is the group mean, lifted to the
// reference (expert) reward when that is higher: members are measured
// against the better of "typical group member" and "known-good trajectory".
// A zero-variance group carries no relative signal and gets all-zero
// advantages rather than a 1/epsilon blowup.
std::vector<double> reference_guided_advantage(
    const std::vector<double>& rewards, std::optional<double> reference_reward,
    double epsilon_adv);

struct SftLossGrad {
  double loss = 0.0;     // mean negative log likelihood over the batch
  FeatureVector grad{};  // d loss / d weights
};

SftLossGrad sft_loss_and_grad(const RouterParams& params,
                              const std::vector<SftExample>& batch);

struct SftTrainResult {
  RouterParams params;
  std::vector<double> losses;  // one entry per iteration
};

SftTrainResult train_bosft(const SftDataset& ds, const BopoConfig& bcfg,
                           std::uint64_t seed,
                           const RouterParams& init = RouterParams{});

struct GroupMember {
  std::vector<FeatureVector> features;  // observation at each decision
  std::vector<RouterAction> actions;    // action taken at each decision
  std::vector<double> logp_old;         // log prob under the rollout policy
  double reward = 0.0;
};

struct GroupRollout {
  std::uint64_t task_id = 0;
  std::vector<GroupMember> members;
  std::optional<double> reference_reward;
};

struct SurrogateResult {
  double objective = 0.0;  // clipped policy term minus beta_kl * mean KL
  double mean_kl = 0.0;    // mean per-decision KL(pi_theta || pi_ref)
  FeatureVector grad{};    // d objective / d theta (ascent direction)
};

// Per-decision importance ratios against logp_old, clipped to
// [1 - ratio_clip, 1 + ratio_clip]; trajectory terms are decision means,
// averaged over all group members. Gradients saturate to zero exactly where
// the clip or the KL probability clamp is active.
SurrogateResult bopo_surrogate_and_grad(const RouterParams& theta,
                                        const RouterParams& theta_ref,
                                        const std::vector<GroupRollout>& groups,
                                        const BopoConfig& bcfg,
                                        double epsilon_adv);

struct BopoIterationLog {
  long iteration = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_cost = 0.0;
  double mean_kl = 0.0;
  double lambda = 0.0;
};

struct BopoTrainResult {
  RouterParams params;
  std::vector<BopoIterationLog> log;
};

// One ascent step per iteration on freshly sampled group rollouts. Streams
// are keyed by absolute iteration index, so training start..N in one call or
// split across resumed calls yields bit-identical parameters. ref_override
// pins the KL anchor when resuming (it must stay the original start policy).
BopoTrainResult train_bopo(const EnvConfig& env, const CostModel& cm,
                           const std::vector<Task>& tasks,
                           const std::map<std::uint64_t, DifficultyLabel>& labels,
                           const std::map<std::uint64_t, CostBoundaries>& boundaries,
                           const std::map<std::uint64_t, Trajectory>& experts,
                           const RouterParams& init, const RewardConfig& rcfg,
                           const BopoConfig& bcfg, std::uint64_t seed,
                           long start_iteration = 0,
                           const RouterParams* ref_override = nullptr);

}  // namespace routerlab

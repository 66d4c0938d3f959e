#include "routerlab/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace routerlab {

void BopoConfig::validate() const {
  if (group_size < 2)
    throw std::invalid_argument("bopo: group_size must be >= 2");
  if (beta_kl < 0.0) throw std::invalid_argument("bopo: beta_kl < 0");
  if (!(learning_rate > 0.0) || !(sft_learning_rate > 0.0))
    throw std::invalid_argument("bopo: learning rates must be positive");
  if (!(ratio_clip > 0.0) || ratio_clip >= 1.0)
    throw std::invalid_argument("bopo: ratio_clip must lie in (0,1)");
  if (iterations < 0 || sft_iterations < 0)
    throw std::invalid_argument("bopo: negative iteration count");
  if (tasks_per_batch < 1 || sft_batch_size < 1)
    throw std::invalid_argument("bopo: batch sizes must be >= 1");
  if (!(divergence_guard > 0.0))
    throw std::invalid_argument("bopo: divergence_guard must be positive");
}

double boundary_relative_reward(const Trajectory& traj, DifficultyLabel label,
                                const CostBoundaries& bounds,
                                const RewardConfig& rcfg) {
  double r = 0.0;
  if (traj.success) {
    r += rcfg.success;
    if (label == DifficultyLabel::hard) r += rcfg.hard_bonus;
  }
  r -= rcfg.lambda *
       normalized_cost(traj.total_cost, bounds, rcfg.epsilon_norm);
  return r;
}

double vanilla_reward(const Trajectory& traj, const RewardConfig& rcfg) {
  return (traj.success ? rcfg.success : 0.0) - rcfg.lambda * traj.total_cost;
}

std::vector<double> reference_guided_advantage(
    const std::vector<double>& rewards, std::optional<double> reference_reward,
    double epsilon_adv) {
  if (rewards.empty())
    throw std::invalid_argument("advantage: empty reward group");
  double mu = 0.0;
  for (double r : rewards) mu += r;
  mu /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mu) * (r - mu);
  var /= static_cast<double>(rewards.size());
  double sigma = std::sqrt(var);
  std::vector<double> adv(rewards.size(), 0.0);
  // Degenerate group: nothing to compare. The cutoff sits far above the
  // rounding noise an all-equal group leaves in sigma (~1e-16) and far below
  // any real spread, so a high reference can't turn noise into a 1/epsilon
  // advantage blowup.
  double scale = std::max(1.0, std::abs(mu));
  if (sigma <= 1e-12 * scale) return adv;
  double baseline = mu;
  if (reference_reward && *reference_reward > baseline)
    baseline = *reference_reward;
  // Group-mean advantages are bounded by sqrt(n-1), but lifting the baseline
  // to the reference breaks that bound: a group that is uniformly far below
  // its expert divides a large gap by a small sigma, and one such group can
  // launch the weights into saturation. Cap the magnitude; "hopelessly worse
  // than the expert" needs no more than a strong push.
  constexpr double kAdvCap = 10.0;
  for (std::size_t i = 0; i < rewards.size(); ++i)
    adv[i] = std::clamp((rewards[i] - baseline) / (sigma + epsilon_adv),
                        -kAdvCap, kAdvCap);
  return adv;
}

SftLossGrad sft_loss_and_grad(const RouterParams& params,
                              const std::vector<SftExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("sft: empty batch");
  SftLossGrad out;
  double inv = 1.0 / static_cast<double>(batch.size());
  for (const SftExample& ex : batch) {
    LogProbGrad lg = logprob_and_grad(params, ex.features, ex.action);
    out.loss -= inv * lg.logprob;
    for (int d = 0; d < kFeatureDim; ++d) out.grad[d] -= inv * lg.grad[d];
  }
  return out;
}

namespace {

void check_finite(const RouterParams& params, double guard, long iteration,
                  const char* stage) {
  for (double w : params.weights) {
    if (!std::isfinite(w) || std::abs(w) > guard)
      throw TrainDivergedError(std::string(stage) +
                               " diverged at iteration " +
                               std::to_string(iteration));
  }
}

}  // namespace

SftTrainResult train_bosft(const SftDataset& ds, const BopoConfig& bcfg,
                           std::uint64_t seed, const RouterParams& init) {
  bcfg.validate();
  std::vector<double> cdf = sampling_cdf(ds);
  SftTrainResult out;
  out.params = init;
  out.losses.reserve(static_cast<std::size_t>(bcfg.sft_iterations));
  std::vector<SftExample> batch;
  for (int it = 0; it < bcfg.sft_iterations; ++it) {
    RngStream rng(derive_seed(seed, "sft_iter", static_cast<std::uint64_t>(it)));
    batch.clear();
    for (int b = 0; b < bcfg.sft_batch_size; ++b)
      batch.push_back(ds.examples[sample_index(cdf, rng.u01())]);
    SftLossGrad lg = sft_loss_and_grad(out.params, batch);
    for (int d = 0; d < kFeatureDim; ++d)
      out.params.weights[d] -= bcfg.sft_learning_rate * lg.grad[d];
    check_finite(out.params, bcfg.divergence_guard, it, "sft");
    out.losses.push_back(lg.loss);
  }
  return out;
}

SurrogateResult bopo_surrogate_and_grad(const RouterParams& theta,
                                        const RouterParams& theta_ref,
                                        const std::vector<GroupRollout>& groups,
                                        const BopoConfig& bcfg,
                                        double epsilon_adv) {
  SurrogateResult out;
  std::size_t n_members = 0;
  for (const auto& g : groups) n_members += g.members.size();
  if (n_members == 0)
    throw std::invalid_argument("surrogate: no group members");
  double clip_lo = 1.0 - bcfg.ratio_clip;
  double clip_hi = 1.0 + bcfg.ratio_clip;
  double clip_sum = 0.0;
  FeatureVector clip_grad{};
  double kl_sum = 0.0;
  FeatureVector kl_grad{};
  std::size_t n_decisions = 0;

  for (const auto& g : groups) {
    std::vector<double> rewards;
    rewards.reserve(g.members.size());
    for (const auto& m : g.members) rewards.push_back(m.reward);
    std::vector<double> adv =
        reference_guided_advantage(rewards, g.reference_reward, epsilon_adv);
    for (std::size_t mi = 0; mi < g.members.size(); ++mi) {
      const GroupMember& m = g.members[mi];
      if (m.features.size() != m.actions.size() ||
          m.features.size() != m.logp_old.size())
        throw std::invalid_argument("surrogate: ragged member record");
      if (m.features.empty()) continue;
      double a_w = adv[mi] / static_cast<double>(m.features.size());
      for (std::size_t t = 0; t < m.features.size(); ++t) {
        const FeatureVector& f = m.features[t];
        LogProbGrad lg = logprob_and_grad(theta, f, m.actions[t]);
        double ratio = std::exp(lg.logprob - m.logp_old[t]);
        double clipped = std::clamp(ratio, clip_lo, clip_hi);
        clip_sum += clipped * a_w;
        if (ratio > clip_lo && ratio < clip_hi) {
          // d(ratio)/d theta = ratio * d(logp)/d theta
          for (int d = 0; d < kFeatureDim; ++d)
            clip_grad[d] += a_w * ratio * lg.grad[d];
        }
        // KL(p_theta || p_ref) for this decision
        double p_raw = prob_large(theta, f);
        double q_raw = prob_large(theta_ref, f);
        double p = std::clamp(p_raw, kKlProbClamp, 1.0 - kKlProbClamp);
        double q = std::clamp(q_raw, kKlProbClamp, 1.0 - kKlProbClamp);
        kl_sum += p * std::log(p / q) +
                  (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
        if (p_raw > kKlProbClamp && p_raw < 1.0 - kKlProbClamp) {
          double dkl_dp = std::log(p / (1.0 - p)) - std::log(q / (1.0 - q));
          double dp = p_raw * (1.0 - p_raw) * dkl_dp;
          for (int d = 0; d < kFeatureDim; ++d) kl_grad[d] += dp * f[d];
        }
        ++n_decisions;
      }
    }
  }

  double inv_members = 1.0 / static_cast<double>(n_members);
  double inv_decisions =
      n_decisions > 0 ? 1.0 / static_cast<double>(n_decisions) : 0.0;
  out.mean_kl = kl_sum * inv_decisions;
  out.objective = clip_sum * inv_members - bcfg.beta_kl * out.mean_kl;
  for (int d = 0; d < kFeatureDim; ++d)
    out.grad[d] = clip_grad[d] * inv_members -
                  bcfg.beta_kl * kl_grad[d] * inv_decisions;
  return out;
}

namespace {

struct RewardContext {
  const std::map<std::uint64_t, DifficultyLabel>& labels;
  const std::map<std::uint64_t, CostBoundaries>& boundaries;
  const RewardConfig& rcfg;
  RewardScheme scheme;

  double operator()(const Trajectory& traj, std::uint64_t task_id) const {
    if (scheme == RewardScheme::vanilla_raw) return vanilla_reward(traj, rcfg);
    auto li = labels.find(task_id);
    auto bi = boundaries.find(task_id);
    if (li == labels.end() || bi == boundaries.end())
      throw std::invalid_argument("train_bopo: missing label or boundaries "
                                  "for task " + std::to_string(task_id));
    return boundary_relative_reward(traj, li->second, bi->second, rcfg);
  }
};

}  // namespace

BopoTrainResult train_bopo(const EnvConfig& env, const CostModel& cm,
                           const std::vector<Task>& tasks,
                           const std::map<std::uint64_t, DifficultyLabel>& labels,
                           const std::map<std::uint64_t, CostBoundaries>& boundaries,
                           const std::map<std::uint64_t, Trajectory>& experts,
                           const RouterParams& init, const RewardConfig& rcfg,
                           const BopoConfig& bcfg, std::uint64_t seed,
                           long start_iteration,
                           const RouterParams* ref_override) {
  env.validate();
  cm.validate();
  bcfg.validate();
  if (tasks.empty()) throw std::invalid_argument("train_bopo: no tasks");
  if (start_iteration < 0 || start_iteration > bcfg.iterations)
    throw std::invalid_argument("train_bopo: bad start_iteration");

  RewardContext reward{labels, boundaries, rcfg, bcfg.reward_scheme};
  RouterParams theta = init;
  RouterParams theta_ref = ref_override ? *ref_override : init;

  // anchors: score each expert trajectory once under the active reward
  std::map<std::uint64_t, double> anchor;
  if (bcfg.use_reference)
    for (const auto& [id, traj] : experts) anchor.emplace(id, reward(traj, id));

  for (const Task& t : tasks)
    if (labels.find(t.task_id) == labels.end())
      throw std::invalid_argument("train_bopo: task without label: " +
                                  std::to_string(t.task_id));

  BopoTrainResult out;
  for (long iter = start_iteration; iter < bcfg.iterations; ++iter) {
    RngStream pick(derive_seed(seed, "bopo_pick",
                               static_cast<std::uint64_t>(iter)));
    // theta_old is this iteration's rollout policy; one ascent step follows
    const RouterParams theta_old = theta;
    std::vector<GroupRollout> groups;
    groups.reserve(static_cast<std::size_t>(bcfg.tasks_per_batch));
    double reward_sum = 0.0, cost_sum = 0.0;
    long success_count = 0, member_count = 0;
    for (int b = 0; b < bcfg.tasks_per_batch; ++b) {
      // batches are uniform over tasks; oversampling is an SFT-only device
      const Task& task = tasks[pick.uniform_int(0, tasks.size() - 1)];
      GroupRollout g;
      g.task_id = task.task_id;
      auto ai = anchor.find(task.task_id);
      if (ai != anchor.end()) g.reference_reward = ai->second;
      for (int m = 0; m < bcfg.group_size; ++m) {
        std::uint64_t ep_seed =
            derive_seed(seed, "bopo_episode", static_cast<std::uint64_t>(iter),
                        static_cast<std::uint64_t>(b),
                        static_cast<std::uint64_t>(m));
        TracedEpisode te = run_learned_episode(env, cm, theta_old, task,
                                               ep_seed);
        GroupMember gm;
        gm.features = std::move(te.features);
        gm.logp_old = std::move(te.logp);
        gm.actions.reserve(te.traj.records.size());
        for (const auto& r : te.traj.records) gm.actions.push_back(r.action);
        gm.reward = reward(te.traj, task.task_id);
        reward_sum += gm.reward;
        cost_sum += te.traj.total_cost;
        if (te.traj.success) ++success_count;
        ++member_count;
        g.members.push_back(std::move(gm));
      }
      groups.push_back(std::move(g));
    }
    SurrogateResult sr = bopo_surrogate_and_grad(theta, theta_ref, groups,
                                                 bcfg, rcfg.epsilon_adv);
    for (int d = 0; d < kFeatureDim; ++d)
      theta.weights[d] += bcfg.learning_rate * sr.grad[d];
    check_finite(theta, bcfg.divergence_guard, iter, "bopo");

    BopoIterationLog row;
    row.iteration = iter;
    row.mean_reward = reward_sum / static_cast<double>(member_count);
    row.success_rate =
        static_cast<double>(success_count) / static_cast<double>(member_count);
    row.mean_cost = cost_sum / static_cast<double>(member_count);
    row.mean_kl = sr.mean_kl;
    row.lambda = rcfg.lambda;
    out.log.push_back(row);
  }
  out.params = theta;
  return out;
}

}  // namespace routerlab

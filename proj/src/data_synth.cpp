#include "routerlab/data_synth.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace routerlab {

std::vector<Trajectory> stratified_rollouts(const EnvConfig& cfg,
                                            const CostModel& cm,
                                            const Task& task, int n_levels,
                                            std::uint64_t seed) {
  if (n_levels < 1)
    throw std::invalid_argument("stratified_rollouts: n_levels < 1");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n_levels));
  for (int k = 1; k <= n_levels; ++k) {
    double p = static_cast<double>(k) / static_cast<double>(n_levels);
    std::uint64_t ep_seed = derive_seed(seed, "stratified", task.task_id,
                                        static_cast<std::uint64_t>(k));
    out.push_back(run_episode(cfg, cm, random_p_policy(p), task, ep_seed));
  }
  return out;
}

std::optional<std::size_t> select_expert(
    const std::vector<Trajectory>& rollouts) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const Trajectory& t = rollouts[i];
    if (!t.success) continue;
    if (!best) {
      best = i;
      continue;
    }
    const Trajectory& b = rollouts[*best];
    if (t.total_cost < b.total_cost ||
        (t.total_cost == b.total_cost && t.large_calls < b.large_calls))
      best = i;
    // equal cost and large calls: keep the earlier index
  }
  return best;
}

namespace {

// Prefer a successful small run (easy tasks end early on success); fall back
// to the first run for tasks where the small model never gets through.
const Trajectory& pick_small_boundary_run(const DifficultyProfile& profile) {
  for (const auto& t : profile.small_runs)
    if (t.success) return t;
  return profile.small_runs.front();
}

}  // namespace

SynthesisResult synthesize_experts(
    const EnvConfig& cfg, const CostModel& cm, const std::vector<Task>& tasks,
    const std::vector<DifficultyProfile>& profiles, int n_levels,
    std::uint64_t seed) {
  std::map<std::uint64_t, const DifficultyProfile*> by_id;
  for (const auto& p : profiles) {
    if (!by_id.emplace(p.task_id, &p).second)
      throw std::invalid_argument("synthesize_experts: duplicate profile id " +
                                  std::to_string(p.task_id));
  }
  SynthesisResult out;
  for (const Task& task : tasks) {
    auto it = by_id.find(task.task_id);
    if (it == by_id.end())
      throw std::invalid_argument("synthesize_experts: no profile for task " +
                                  std::to_string(task.task_id));
    const DifficultyProfile& profile = *it->second;
    DifficultyLabel label = classify(profile);
    ExpertRecord rec;
    rec.task_id = task.task_id;
    rec.label = label;
    if (label == DifficultyLabel::hard) {
      auto rollouts = stratified_rollouts(cfg, cm, task, n_levels, seed);
      auto pick = select_expert(rollouts);
      if (!pick) {
        out.dropped_hard.push_back(task.task_id);
        continue;
      }
      rec.source = "stratified";
      rec.traj = std::move(rollouts[*pick]);
    } else {
      if (profile.small_runs.empty())
        throw std::invalid_argument(
            "synthesize_experts: profile has no small runs");
      rec.source = "small_boundary";
      rec.traj = pick_small_boundary_run(profile);
    }
    out.experts.push_back(std::move(rec));
  }
  return out;
}

std::vector<SftExample> unroll_expert(const EnvConfig& cfg, const Task& task,
                                      const ExpertRecord& rec) {
  std::vector<SftExample> out;
  out.reserve(rec.traj.records.size());
  EpisodeState st;
  for (const StepRecord& r : rec.traj.records) {
    st.current_step = r.step_index;
    st.struggle = r.struggle_shown;
    SftExample ex;
    ex.task_id = rec.task_id;
    ex.label = rec.label;
    ex.features = observe(cfg, task, st);
    ex.action = r.action;
    out.push_back(ex);
    st.records.push_back(r);
  }
  return out;
}

SftDataset build_sft_dataset(const EnvConfig& cfg,
                             const std::vector<Task>& tasks,
                             const std::vector<ExpertRecord>& experts,
                             double hard_share) {
  if (hard_share < 0.0 || hard_share > 1.0)
    throw std::invalid_argument("build_sft_dataset: hard_share outside [0,1]");
  std::map<std::uint64_t, const Task*> by_id;
  for (const Task& t : tasks) by_id.emplace(t.task_id, &t);
  SftDataset ds;
  for (const ExpertRecord& rec : experts) {
    auto it = by_id.find(rec.task_id);
    if (it == by_id.end())
      throw std::invalid_argument("build_sft_dataset: no task for expert " +
                                  std::to_string(rec.task_id));
    auto examples = unroll_expert(cfg, *it->second, rec);
    for (auto& ex : examples) {
      if (ex.label == DifficultyLabel::hard)
        ++ds.hard_examples;
      else
        ++ds.other_examples;
      ds.examples.push_back(std::move(ex));
    }
  }
  if (ds.examples.empty())
    throw std::invalid_argument("build_sft_dataset: no examples");
  double w_hard, w_other;
  if (ds.hard_examples == 0 || ds.other_examples == 0) {
    w_hard = w_other = 1.0 / static_cast<double>(ds.examples.size());
  } else {
    w_hard = hard_share / static_cast<double>(ds.hard_examples);
    w_other = (1.0 - hard_share) / static_cast<double>(ds.other_examples);
  }
  for (auto& ex : ds.examples)
    ex.weight = ex.label == DifficultyLabel::hard ? w_hard : w_other;
  return ds;
}

std::vector<double> sampling_cdf(const SftDataset& ds) {
  std::vector<double> cdf;
  cdf.reserve(ds.examples.size());
  double acc = 0.0;
  for (const auto& ex : ds.examples) {
    acc += ex.weight;
    cdf.push_back(acc);
  }
  if (acc <= 0.0) throw std::invalid_argument("sampling_cdf: zero total weight");
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;
  return cdf;
}

std::size_t sample_index(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return cdf.size() - 1;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace routerlab

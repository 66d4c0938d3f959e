#include "routerlab/taxonomy.hpp"

#include <stdexcept>

namespace routerlab {

std::string label_name(DifficultyLabel label) {
  switch (label) {
    case DifficultyLabel::easy: return "easy";
    case DifficultyLabel::hard: return "hard";
    case DifficultyLabel::intractable: return "intractable";
  }
  throw std::logic_error("unreachable label");
}

DifficultyLabel label_from_name(const std::string& name) {
  if (name == "easy") return DifficultyLabel::easy;
  if (name == "hard") return DifficultyLabel::hard;
  if (name == "intractable") return DifficultyLabel::intractable;
  throw std::invalid_argument("unknown difficulty label: " + name);
}

DifficultyProfile profile_task(const EnvConfig& cfg, const CostModel& cm,
                               const Task& task, int trials_k,
                               std::uint64_t seed) {
  if (trials_k < 1) throw std::invalid_argument("profile: trials_k < 1");
  DifficultyProfile p;
  p.task_id = task.task_id;
  p.trials = trials_k;
  PolicySpec small = always_small_policy();
  PolicySpec large = always_large_policy();
  for (int t = 0; t < trials_k; ++t) {
    std::uint64_t s_seed = derive_seed(seed, "profile_small", task.task_id,
                                       static_cast<std::uint64_t>(t));
    std::uint64_t l_seed = derive_seed(seed, "profile_large", task.task_id,
                                       static_cast<std::uint64_t>(t));
    Trajectory ts = run_episode(cfg, cm, small, task, s_seed);
    Trajectory tl = run_episode(cfg, cm, large, task, l_seed);
    if (ts.success) ++p.small_successes;
    if (tl.success) ++p.large_successes;
    p.small_runs.push_back(std::move(ts));
    p.large_runs.push_back(std::move(tl));
  }
  return p;
}

DifficultyLabel classify(const DifficultyProfile& profile) {
  if (profile.trials < 1) throw std::invalid_argument("classify: no trials");
  double small_rate = static_cast<double>(profile.small_successes) /
                      static_cast<double>(profile.trials);
  if (small_rate >= 0.8) return DifficultyLabel::easy;
  if (profile.small_successes == 0 && profile.large_successes == 0)
    return DifficultyLabel::intractable;
  return DifficultyLabel::hard;
}

double PartitionSummary::share(DifficultyLabel label) const {
  double total = static_cast<double>(labels.size());
  if (total == 0) return 0.0;
  switch (label) {
    case DifficultyLabel::easy: return easy_count / total;
    case DifficultyLabel::hard: return hard_count / total;
    case DifficultyLabel::intractable: return intractable_count / total;
  }
  return 0.0;
}

PartitionSummary partition_dataset(
    const std::vector<DifficultyProfile>& profiles) {
  PartitionSummary s;
  for (const auto& p : profiles) {
    DifficultyLabel label = classify(p);
    auto [it, inserted] = s.labels.emplace(p.task_id, label);
    (void)it;
    if (!inserted)
      throw std::invalid_argument("duplicate task id in partition: " +
                                  std::to_string(p.task_id));
    switch (label) {
      case DifficultyLabel::easy: ++s.easy_count; break;
      case DifficultyLabel::hard: ++s.hard_count; break;
      case DifficultyLabel::intractable: ++s.intractable_count; break;
    }
  }
  return s;
}

}  // namespace routerlab

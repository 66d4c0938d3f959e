#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/decoding.hpp"
#include "routerlab/env.hpp"

namespace routerlab {

enum class DifficultyLabel { easy, hard, intractable };

std::string label_name(DifficultyLabel label);
DifficultyLabel label_from_name(const std::string& name);

// K trials under the all-small policy and K under the all-large policy.
struct DifficultyProfile {
  std::uint64_t task_id = 0;
  int trials = 0;
  int small_successes = 0;
  int large_successes = 0;
  std::vector<Trajectory> small_runs;
  std::vector<Trajectory> large_runs;
};

DifficultyProfile profile_task(const EnvConfig& cfg, const CostModel& cm,
                               const Task& task, int trials_k,
                               std::uint64_t seed);

// Easy: the small model alone passes at least 80% of trials.
// Intractable: neither boundary policy ever succeeds.
// Hard: everything else (the large model adds real value).
DifficultyLabel classify(const DifficultyProfile& profile);

struct PartitionSummary {
  std::map<std::uint64_t, DifficultyLabel> labels;
  int easy_count = 0;
  int hard_count = 0;
  int intractable_count = 0;

  double share(DifficultyLabel label) const;
};

// Throws on duplicate task ids.
PartitionSummary partition_dataset(
    const std::vector<DifficultyProfile>& profiles);

}  // namespace routerlab

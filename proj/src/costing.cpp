#include "routerlab/costing.hpp"

#include <algorithm>
#include <stdexcept>

#include "routerlab/env.hpp"
#include "routerlab/taxonomy.hpp"

namespace routerlab {

double trajectory_cost(const Trajectory& traj) {
  double c = 0.0;
  for (const auto& r : traj.records) c += r.cost;
  return c;
}

namespace {

double mean_policy_cost(const std::vector<Trajectory>& runs,
                        const CostModel& cm) {
  if (runs.empty())
    throw std::invalid_argument("boundary_costs: profile has no runs");
  double sum = 0.0;
  for (const auto& t : runs) {
    // reprice from the recorded actions so boundaries always reflect the
    // cost model passed in, not the one active at profiling time
    for (const auto& r : t.records)
      sum += r.action == RouterAction::LARGE ? cm.c_large : cm.c_small;
  }
  return sum / static_cast<double>(runs.size());
}

}  // namespace

CostBoundaries boundary_costs(const DifficultyProfile& profile,
                              const CostModel& cm) {
  cm.validate();
  CostBoundaries b;
  b.small_mean = mean_policy_cost(profile.small_runs, cm);
  b.large_mean = mean_policy_cost(profile.large_runs, cm);
  b.c_min = std::min(b.small_mean, b.large_mean);
  b.c_max = std::max(b.small_mean, b.large_mean);
  return b;
}

double normalized_cost(double c, const CostBoundaries& bounds, double eps) {
  double denom = bounds.c_max - bounds.c_min + eps;
  if (denom == 0.0)
    throw std::invalid_argument(
        "normalized_cost: degenerate boundaries with eps = 0");
  return std::clamp((c - bounds.c_min) / denom, 0.0, 1.0);
}

}  // namespace routerlab

#pragma once

namespace routerlab {

struct Trajectory;
struct DifficultyProfile;

// Per-action prices. The large model is the expensive one; the default ratio
// is 5:1.
struct CostModel {
  double c_small = 0.4;
  double c_large = 2.0;

  void validate() const;
};

// Per-task cost anchors estimated from boundary-policy profiling runs.
// c_min/c_max are min/max of the two boundary means, so normalization stays
// well-behaved even when the all-small policy is *more* expensive than the
// all-large one (failed small runs that drag to the horizon).
struct CostBoundaries {
  double small_mean = 0.0;  // mean cost of the profiling pi_small runs
  double large_mean = 0.0;  // mean cost of the profiling pi_large runs
  double c_min = 0.0;
  double c_max = 0.0;
};

double trajectory_cost(const Trajectory& traj);

CostBoundaries boundary_costs(const DifficultyProfile& profile,
                              const CostModel& cm);

// clip((c - c_min) / (c_max - c_min + eps), 0, 1)
// Throws if eps == 0 and c_max == c_min.
double normalized_cost(double c, const CostBoundaries& bounds, double eps);

}  // namespace routerlab

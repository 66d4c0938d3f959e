#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "routerlab/costing.hpp"
#include "routerlab/data_synth.hpp"
#include "routerlab/env.hpp"
#include "routerlab/harness.hpp"
#include "routerlab/taxonomy.hpp"
#include "routerlab/training.hpp"

namespace routerlab {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// %.10g: compact, deterministic, more precision than any figure needs
std::string format_g(double x);

// per-step actions as "SLLS...", per-step costs comma-joined
std::string actions_string(const Trajectory& t);
std::string costs_string(const Trajectory& t);

// Trajectory tables round-trip actions, costs and outcome summary; step
// outcomes and struggle flags are not serialized (readers that need full
// observations regenerate episodes from the recorded seeds).
void write_trajectories_tsv(const std::string& path,
                            const std::vector<Trajectory>& ts);
std::vector<Trajectory> read_trajectories_tsv(const std::string& path);

struct TaxonomyRow {
  std::uint64_t task_id = 0;
  int trials = 0;
  int small_successes = 0;
  int large_successes = 0;
  DifficultyLabel label = DifficultyLabel::easy;
};

void write_taxonomy_tsv(const std::string& path,
                        const std::vector<DifficultyProfile>& profiles);
std::vector<TaxonomyRow> read_taxonomy_tsv(const std::string& path);

void write_boundaries_tsv(
    const std::string& path,
    const std::vector<std::pair<std::uint64_t, CostBoundaries>>& rows);
std::vector<std::pair<std::uint64_t, CostBoundaries>> read_boundaries_tsv(
    const std::string& path);

void write_experts_tsv(const std::string& path,
                       const std::vector<ExpertRecord>& experts);
std::vector<ExpertRecord> read_experts_tsv(const std::string& path);

void write_id_list_tsv(const std::string& path, const std::string& column,
                       const std::vector<std::uint64_t>& ids);
std::vector<std::uint64_t> read_id_list_tsv(const std::string& path);

void write_training_log_csv(const std::string& path,
                            const std::vector<BopoIterationLog>& rows,
                            bool append = false);
std::vector<BopoIterationLog> read_training_log_csv(const std::string& path);

void write_sft_loss_csv(const std::string& path,
                        const std::vector<double>& losses);

void write_frontier_csv(const std::string& path,
                        const std::vector<FrontierPoint>& points);
std::vector<FrontierPoint> read_frontier_csv(const std::string& path);

void write_hard_budget_csv(const std::string& path,
                           const std::vector<HardBudgetRow>& rows);
std::vector<HardBudgetRow> read_hard_budget_csv(const std::string& path);

void write_allocation_csv(const std::string& path,
                          const std::vector<AllocationRow>& rows);
std::vector<AllocationRow> read_allocation_csv(const std::string& path);

}  // namespace routerlab

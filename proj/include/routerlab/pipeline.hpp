#pragma once

#include <stdexcept>
#include <string>

#include "routerlab/config.hpp"

namespace routerlab {

// A stage was asked to consume an artifact that an earlier stage has not
// produced yet.
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelinePaths {
  std::string out_dir;

  std::string taxonomy_train() const { return out_dir + "/taxonomy_train.tsv"; }
  std::string taxonomy_eval() const { return out_dir + "/taxonomy_eval.tsv"; }
  std::string boundaries_train() const {
    return out_dir + "/boundaries_train.tsv";
  }
  std::string experts() const { return out_dir + "/experts.tsv"; }
  std::string dropped_hard() const { return out_dir + "/dropped_hard.tsv"; }
  std::string synth_manifest() const { return out_dir + "/synth_manifest.cfg"; }
  std::string sft_checkpoint() const { return out_dir + "/sft.ckpt"; }
  std::string sft_loss() const { return out_dir + "/sft_loss.csv"; }
  std::string bopo_checkpoint(double lambda, int seed_idx) const;
  std::string bopo_log(double lambda, int seed_idx) const;
  std::string frontier() const { return out_dir + "/frontier.csv"; }
  std::string hard_budget() const { return out_dir + "/hard_budget.csv"; }
  std::string allocation() const { return out_dir + "/allocation.csv"; }
};

// Pipeline stages, in run order. Later stages read the earlier stages'
// artifacts and throw MissingInputError when they are absent. Stages are
// idempotent: finished work (existing checkpoints) is skipped, interrupted
// training resumes from the last checkpoint.
void cmd_profile(const LabConfig& cfg, const PipelinePaths& paths);
void cmd_synthesize(const LabConfig& cfg, const PipelinePaths& paths);
void cmd_train(const LabConfig& cfg, const PipelinePaths& paths,
               const std::string& stage);  // "sft" or "bopo"
void cmd_eval(const LabConfig& cfg, const PipelinePaths& paths,
              const std::string& mode);  // frontier | hard_budget | allocation

}  // namespace routerlab

#include "routerlab/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "routerlab/data_synth.hpp"
#include "routerlab/decoding.hpp"
#include "routerlab/harness.hpp"
#include "routerlab/io.hpp"
#include "routerlab/policy.hpp"
#include "routerlab/taxonomy.hpp"
#include "routerlab/training.hpp"

namespace fs = std::filesystem;

namespace routerlab {

std::string PipelinePaths::bopo_checkpoint(double lambda, int seed_idx) const {
  return out_dir + "/bopo_l" + format_g(lambda) + "_s" +
         std::to_string(seed_idx) + ".ckpt";
}

std::string PipelinePaths::bopo_log(double lambda, int seed_idx) const {
  return out_dir + "/bopo_l" + format_g(lambda) + "_s" +
         std::to_string(seed_idx) + ".csv";
}

namespace {

// eval-split task ids live in their own range so a mixed-up lookup fails
// loudly instead of silently reusing a train task
constexpr std::uint64_t kEvalIdBase = 1000000;

std::vector<Task> make_tasks(const LabConfig& cfg, bool eval_split) {
  std::uint64_t split_seed =
      derive_seed(cfg.seed, eval_split ? "eval_split" : "train_split");
  int n = eval_split ? cfg.eval_tasks : cfg.train_tasks;
  std::uint64_t base = eval_split ? kEvalIdBase : 0;
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    tasks.push_back(generate_task(cfg.env, split_seed,
                                  base + static_cast<std::uint64_t>(i)));
  return tasks;
}

std::vector<DifficultyProfile> make_profiles(const LabConfig& cfg,
                                             const std::vector<Task>& tasks,
                                             bool eval_split) {
  std::uint64_t seed =
      derive_seed(cfg.seed, eval_split ? "profile_eval" : "profile_train");
  std::vector<DifficultyProfile> ps;
  ps.reserve(tasks.size());
  for (const Task& t : tasks)
    ps.push_back(profile_task(cfg.env, cfg.cost, t, cfg.taxonomy_trials, seed));
  return ps;
}

void require_file(const std::string& path, const char* produced_by) {
  if (!fs::exists(path))
    throw MissingInputError(path + " not found (run `routerlab " +
                            std::string(produced_by) + "` first)");
}

void print_partition(const char* split, std::size_t n_tasks,
                     const PartitionSummary& part) {
  std::cout << "profile: " << split << " " << n_tasks << " tasks -> easy "
            << part.easy_count << ", hard " << part.hard_count
            << ", intractable " << part.intractable_count << "\n";
}

// Regenerates the synthesis stage in memory. Deterministic in the config,
// so artifacts written earlier must agree with the result.
SynthesisResult regenerate_synthesis(const LabConfig& cfg,
                                     const std::vector<Task>& tasks,
                                     const std::vector<DifficultyProfile>& ps) {
  return synthesize_experts(cfg.env, cfg.cost, tasks, ps,
                            cfg.stratified_levels,
                            derive_seed(cfg.seed, "synth"));
}

void check_taxonomy_matches(const LabConfig& cfg,
                            const std::vector<DifficultyProfile>& profiles,
                            const std::string& path) {
  std::vector<TaxonomyRow> rows = read_taxonomy_tsv(path);
  if (rows.size() != profiles.size())
    throw ConfigError(path + " has " + std::to_string(rows.size()) +
                      " rows but the config generates " +
                      std::to_string(profiles.size()) +
                      " tasks; re-run profile");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& p = profiles[i];
    if (r.task_id != p.task_id || r.trials != p.trials ||
        r.small_successes != p.small_successes ||
        r.large_successes != p.large_successes || r.label != classify(p))
      throw ConfigError(path + " does not match the current config/seed "
                        "(row for task " + std::to_string(r.task_id) +
                        " differs); re-run profile");
  }
  (void)cfg;
}

void check_experts_match(const std::vector<ExpertRecord>& from_file,
                         const std::vector<ExpertRecord>& regenerated,
                         const std::string& path) {
  if (from_file.size() != regenerated.size())
    throw ConfigError(path + " does not match the current config/seed "
                      "(expert count differs); re-run synthesize");
  for (std::size_t i = 0; i < from_file.size(); ++i) {
    const auto& a = from_file[i];
    const auto& b = regenerated[i];
    if (a.task_id != b.task_id || a.label != b.label ||
        a.source != b.source ||
        actions_string(a.traj) != actions_string(b.traj) ||
        a.traj.success != b.traj.success)
      throw ConfigError(path + " does not match the current config/seed "
                        "(expert for task " + std::to_string(a.task_id) +
                        " differs); re-run synthesize");
  }
}

std::map<std::uint64_t, DifficultyLabel> label_map(
    const std::vector<TaxonomyRow>& rows) {
  std::map<std::uint64_t, DifficultyLabel> m;
  for (const auto& r : rows) m[r.task_id] = r.label;
  return m;
}

RouterParams load_trained(const LabConfig& cfg, const PipelinePaths& paths,
                          double lambda, int seed_idx) {
  std::string path = paths.bopo_checkpoint(lambda, seed_idx);
  require_file(path, "train --stage bopo");
  Checkpoint ck = load_checkpoint(path);
  if (ck.iteration < cfg.bopo.iterations)
    throw MissingInputError(path + " is trained to iteration " +
                            std::to_string(ck.iteration) + " of " +
                            std::to_string(cfg.bopo.iterations) +
                            "; finish `routerlab train --stage bopo` first");
  return ck.params;
}

}  // namespace

void cmd_profile(const LabConfig& cfg, const PipelinePaths& paths) {
  fs::create_directories(paths.out_dir);

  std::vector<Task> train_tasks = make_tasks(cfg, false);
  std::vector<DifficultyProfile> train_profiles =
      make_profiles(cfg, train_tasks, false);
  write_taxonomy_tsv(paths.taxonomy_train(), train_profiles);
  std::vector<std::pair<std::uint64_t, CostBoundaries>> bounds;
  bounds.reserve(train_profiles.size());
  for (const auto& p : train_profiles)
    bounds.emplace_back(p.task_id, boundary_costs(p, cfg.cost));
  write_boundaries_tsv(paths.boundaries_train(), bounds);
  print_partition("train", train_tasks.size(),
                  partition_dataset(train_profiles));

  std::vector<Task> eval_tasks = make_tasks(cfg, true);
  std::vector<DifficultyProfile> eval_profiles =
      make_profiles(cfg, eval_tasks, true);
  write_taxonomy_tsv(paths.taxonomy_eval(), eval_profiles);
  print_partition("eval", eval_tasks.size(), partition_dataset(eval_profiles));
}

void cmd_synthesize(const LabConfig& cfg, const PipelinePaths& paths) {
  require_file(paths.taxonomy_train(), "profile");
  std::vector<Task> tasks = make_tasks(cfg, false);
  std::vector<DifficultyProfile> profiles = make_profiles(cfg, tasks, false);
  check_taxonomy_matches(cfg, profiles, paths.taxonomy_train());

  SynthesisResult synth = regenerate_synthesis(cfg, tasks, profiles);
  write_experts_tsv(paths.experts(), synth.experts);
  write_id_list_tsv(paths.dropped_hard(), "task_id", synth.dropped_hard);

  int easy = 0, hard = 0, intractable = 0;
  for (const auto& e : synth.experts) {
    switch (e.label) {
      case DifficultyLabel::easy: ++easy; break;
      case DifficultyLabel::hard: ++hard; break;
      case DifficultyLabel::intractable: ++intractable; break;
    }
  }
  KeyValueConfig mf;
  mf.set("experts", std::to_string(synth.experts.size()));
  mf.set("experts_easy", std::to_string(easy));
  mf.set("experts_hard", std::to_string(hard));
  mf.set("experts_intractable", std::to_string(intractable));
  mf.set("dropped_hard", std::to_string(synth.dropped_hard.size()));
  mf.set("stratified_levels", std::to_string(cfg.stratified_levels));
  std::ofstream mfo(paths.synth_manifest());
  if (!mfo) throw IoError("cannot write file: " + paths.synth_manifest());
  mfo << mf.serialize();

  std::cout << "synthesize: " << synth.experts.size() << " experts (easy "
            << easy << ", hard " << hard << ", intractable " << intractable
            << "), dropped " << synth.dropped_hard.size()
            << " hard tasks without a successful rollout\n";
}

namespace {

void train_sft_stage(const LabConfig& cfg, const PipelinePaths& paths) {
  require_file(paths.experts(), "synthesize");
  if (fs::exists(paths.sft_checkpoint())) {
    std::cout << "sft: " << paths.sft_checkpoint()
              << " already exists, skipping\n";
    return;
  }
  std::vector<ExpertRecord> file_experts = read_experts_tsv(paths.experts());

  // The tsv does not carry per-step observations, so rebuild the experts
  // deterministically and insist they agree with the artifact.
  std::vector<Task> tasks = make_tasks(cfg, false);
  std::vector<DifficultyProfile> profiles = make_profiles(cfg, tasks, false);
  SynthesisResult synth = regenerate_synthesis(cfg, tasks, profiles);
  check_experts_match(file_experts, synth.experts, paths.experts());

  SftDataset ds =
      build_sft_dataset(cfg.env, tasks, synth.experts, cfg.sft_hard_share);
  SftTrainResult res =
      train_bosft(ds, cfg.bopo, derive_seed(cfg.seed, "sft_run"));
  save_checkpoint(paths.sft_checkpoint(), res.params,
                  cfg.bopo.sft_iterations);
  write_sft_loss_csv(paths.sft_loss(), res.losses);
  std::cout << "sft: trained on " << ds.examples.size() << " decisions ("
            << ds.hard_examples << " hard), " << cfg.bopo.sft_iterations
            << " iterations, final loss "
            << (res.losses.empty() ? 0.0 : res.losses.back()) << "\n";
}

void train_bopo_stage(const LabConfig& cfg, const PipelinePaths& paths) {
  require_file(paths.sft_checkpoint(), "train --stage sft");
  require_file(paths.experts(), "synthesize");
  require_file(paths.taxonomy_train(), "profile");
  require_file(paths.boundaries_train(), "profile");

  Checkpoint sft = load_checkpoint(paths.sft_checkpoint());
  std::map<std::uint64_t, DifficultyLabel> labels =
      label_map(read_taxonomy_tsv(paths.taxonomy_train()));
  std::map<std::uint64_t, CostBoundaries> bounds;
  for (const auto& [id, b] : read_boundaries_tsv(paths.boundaries_train()))
    bounds[id] = b;
  std::map<std::uint64_t, Trajectory> anchors;
  for (const auto& e : read_experts_tsv(paths.experts()))
    anchors[e.task_id] = e.traj;
  std::vector<Task> tasks = make_tasks(cfg, false);

  for (std::size_t li = 0; li < cfg.lambda_list.size(); ++li) {
    double lambda = cfg.lambda_list[li];
    for (int s = 0; s < cfg.eval_seeds; ++s) {
      std::string ck_path = paths.bopo_checkpoint(lambda, s);
      RouterParams init = sft.params;
      long start = 0;
      if (fs::exists(ck_path)) {
        Checkpoint ck = load_checkpoint(ck_path);
        if (ck.iteration >= cfg.bopo.iterations) {
          std::cout << "bopo: lambda " << format_g(lambda) << " seed " << s
                    << " already trained, skipping\n";
          continue;
        }
        init = ck.params;
        start = ck.iteration;
      }
      RewardConfig rcfg = cfg.reward;
      rcfg.lambda = lambda;
      BopoTrainResult res = train_bopo(
          cfg.env, cfg.cost, tasks, labels, bounds, anchors, init, rcfg,
          cfg.bopo,
          derive_seed(cfg.seed, "bopo_run", li, static_cast<std::uint64_t>(s)),
          start, &sft.params);
      save_checkpoint(ck_path, res.params, cfg.bopo.iterations);
      write_training_log_csv(paths.bopo_log(lambda, s), res.log,
                             /*append=*/start > 0);
      if (!res.log.empty()) {
        const auto& last = res.log.back();
        std::cout << "bopo: lambda " << format_g(lambda) << " seed " << s
                  << " -> reward " << format_g(last.mean_reward) << ", sr "
                  << format_g(last.success_rate) << ", cost "
                  << format_g(last.mean_cost) << "\n";
      }
    }
  }
}

}  // namespace

void cmd_train(const LabConfig& cfg, const PipelinePaths& paths,
               const std::string& stage) {
  fs::create_directories(paths.out_dir);
  if (stage == "sft")
    train_sft_stage(cfg, paths);
  else if (stage == "bopo")
    train_bopo_stage(cfg, paths);
  else
    throw ConfigError("unknown train stage: " + stage);
}

namespace {

void eval_frontier(const LabConfig& cfg, const PipelinePaths& paths) {
  std::vector<Task> eval_tasks = make_tasks(cfg, true);
  std::vector<Task> train_tasks = make_tasks(cfg, false);

  // per-seed single-turn classifiers, fit on the train split
  std::vector<RouterParams> st_params;
  for (int s = 0; s < cfg.eval_seeds; ++s)
    st_params.push_back(train_single_turn(
        cfg.env, cfg.cost, train_tasks, cfg.single_turn_cutoff,
        derive_seed(cfg.seed, "single_turn", static_cast<std::uint64_t>(s))));

  // per-(lambda, seed) trained routers
  std::vector<std::vector<RouterParams>> bopo_params(cfg.lambda_list.size());
  for (std::size_t li = 0; li < cfg.lambda_list.size(); ++li)
    for (int s = 0; s < cfg.eval_seeds; ++s)
      bopo_params[li].push_back(
          load_trained(cfg, paths, cfg.lambda_list[li], s));

  std::vector<FrontierPoint> points;
  auto add = [&](const std::string& method, double knob,
                 const std::function<PolicySpec(double, int)>& factory) {
    points.push_back(frontier_point(cfg.env, cfg.cost, method, knob, factory,
                                    eval_tasks, cfg.episodes_per_task,
                                    cfg.eval_seeds, cfg.seed));
  };

  add("always_small", 0.0,
      [](double, int) { return always_small_policy(); });
  add("always_large", 0.0,
      [](double, int) { return always_large_policy(); });
  for (double p : cfg.random_p_list)
    add("random_p", p, [](double knob, int) { return random_p_policy(knob); });
  for (int k : cfg.first_large_list)
    add("first_large", static_cast<double>(k), [](double knob, int) {
      return first_large_policy(static_cast<int>(knob));
    });
  add("cascade", cfg.cascade_threshold,
      [](double knob, int) { return cascade_policy(knob); });
  add("single_turn", cfg.single_turn_cutoff, [&](double, int s) {
    return single_turn_policy(st_params[static_cast<std::size_t>(s)]);
  });
  for (std::size_t li = 0; li < cfg.lambda_list.size(); ++li)
    add("bopo", cfg.lambda_list[li], [&, li](double, int s) {
      return learned_policy(bopo_params[li][static_cast<std::size_t>(s)]);
    });

  write_frontier_csv(paths.frontier(), points);
  std::cout << "frontier: " << points.size() << " points -> "
            << paths.frontier() << "\n";
}

void eval_hard_budget(const LabConfig& cfg, const PipelinePaths& paths) {
  std::vector<Task> eval_tasks = make_tasks(cfg, true);
  std::vector<RouterParams> ref_params;
  for (int s = 0; s < cfg.eval_seeds; ++s)
    ref_params.push_back(load_trained(cfg, paths, cfg.reference_lambda, s));

  std::vector<std::pair<std::string, std::function<PolicySpec(int, int)>>>
      methods;
  methods.reserve(4);
  methods.emplace_back("always_small",
                       [](int, int) { return always_small_policy(); });
  // unconstrained topline: ignores the cap, so use_pct shows the violation
  methods.emplace_back("always_large_uncapped",
                       [](int, int) { return always_large_policy(); });
  methods.emplace_back("random_p_bcd", [](int k, int) {
    return with_budget(random_p_policy(0.5), k, BudgetUnit::large_calls);
  });
  methods.emplace_back("bopo_bcd", [&](int k, int s) {
    return with_budget(learned_policy(ref_params[static_cast<std::size_t>(s)]),
                       k, BudgetUnit::large_calls);
  });

  std::vector<HardBudgetRow> rows =
      hard_budget_eval(cfg.env, cfg.cost, methods, cfg.budget_list, eval_tasks,
                       cfg.episodes_per_task, cfg.eval_seeds, cfg.seed);
  write_hard_budget_csv(paths.hard_budget(), rows);
  std::cout << "hard_budget: " << rows.size() << " rows -> "
            << paths.hard_budget() << "\n";
}

void eval_allocation(const LabConfig& cfg, const PipelinePaths& paths) {
  require_file(paths.taxonomy_eval(), "profile");
  std::vector<Task> eval_tasks = make_tasks(cfg, true);
  std::map<std::uint64_t, DifficultyLabel> labels =
      label_map(read_taxonomy_tsv(paths.taxonomy_eval()));

  std::vector<AllocationRow> acc;
  for (int s = 0; s < cfg.eval_seeds; ++s) {
    PolicySpec spec =
        learned_policy(load_trained(cfg, paths, cfg.reference_lambda, s));
    std::vector<AllocationRow> rows = budget_allocation_report(
        cfg.env, cfg.cost, spec, eval_tasks, labels, cfg.episodes_per_task,
        cfg.seed, s);
    if (acc.empty()) {
      acc = rows;
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        acc[i].count_share += rows[i].count_share;
        acc[i].cost_share += rows[i].cost_share;
      }
    }
  }
  for (auto& r : acc) {
    r.count_share /= cfg.eval_seeds;
    r.cost_share /= cfg.eval_seeds;
  }
  write_allocation_csv(paths.allocation(), acc);
  std::cout << "allocation: " << acc.size() << " rows -> "
            << paths.allocation() << "\n";
}

}  // namespace

void cmd_eval(const LabConfig& cfg, const PipelinePaths& paths,
              const std::string& mode) {
  fs::create_directories(paths.out_dir);
  if (mode == "frontier")
    eval_frontier(cfg, paths);
  else if (mode == "hard_budget")
    eval_hard_budget(cfg, paths);
  else if (mode == "allocation")
    eval_allocation(cfg, paths);
  else
    throw ConfigError("unknown eval mode: " + mode);
}

}  // namespace routerlab

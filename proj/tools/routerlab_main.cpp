#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "routerlab/config.hpp"
#include "routerlab/io.hpp"
#include "routerlab/pipeline.hpp"
#include "routerlab/training.hpp"

namespace {

int fail(const char* cls, const std::exception& e, int code = 1) {
  std::cerr << "error: " << cls << ": " << e.what() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale lab for budget-aware small/large model routing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_override = 0;
  std::string stage;
  std::string mode;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--out", out_dir, "artifact directory (default: out)");
    sub->add_option("--seed", seed_override, "override run.seed");
  };

  CLI::App* profile = app.add_subcommand(
      "profile", "run boundary policies, label task difficulty, "
                 "estimate cost boundaries");
  add_common(profile);

  CLI::App* synthesize = app.add_subcommand(
      "synthesize", "stratified rollouts and expert trajectory selection");
  add_common(synthesize);

  CLI::App* train =
      app.add_subcommand("train", "fit the router (sft warm start, then "
                                  "group-relative policy optimization)");
  add_common(train);
  train->add_option("--stage", stage, "sft | bopo")
      ->required()
      ->check(CLI::IsMember({"sft", "bopo"}));

  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate routers and baselines on the held-out split");
  add_common(eval);
  eval->add_option("--mode", mode, "frontier | hard_budget | allocation")
      ->required()
      ->check(CLI::IsMember({"frontier", "hard_budget", "allocation"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage_error: " << e.what() << std::endl;
    return 2;
  }

  try {
    routerlab::LabConfig cfg = routerlab::load_lab_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) cfg.seed = seed_override;
    routerlab::PipelinePaths paths{out_dir};
    if (sub == profile)
      routerlab::cmd_profile(cfg, paths);
    else if (sub == synthesize)
      routerlab::cmd_synthesize(cfg, paths);
    else if (sub == train)
      routerlab::cmd_train(cfg, paths, stage);
    else
      routerlab::cmd_eval(cfg, paths, mode);
    return 0;
  } catch (const routerlab::ConfigError& e) {
    return fail("config_error", e);
  } catch (const routerlab::MissingInputError& e) {
    return fail("missing_input", e);
  } catch (const routerlab::TrainDivergedError& e) {
    return fail("train_diverged", e);
  } catch (const routerlab::IoError& e) {
    return fail("io_error", e);
  } catch (const std::exception& e) {
    return fail("internal_error", e);
  }
}

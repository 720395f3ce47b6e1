// Command-line front end: train | evaluate | validate-model | compare-rewards |
// trace | export-model. Exit status 0 on success, 1 on validation failure,
// 2 on runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "reminisce/experiment.hpp"
#include "reminisce/io_util.hpp"
#include "reminisce/serialization.hpp"

namespace {

using namespace reminisce;

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kRuntimeError = 2;

struct CommonFlags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string reward;
  std::string model;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)");
  cmd->add_option("--seed", f.seeds, "Training seed; repeatable");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--reward", f.reward, "Reward preset")->check(CLI::IsMember({"R1", "R2"}));
  cmd->add_option("--model", f.model, "'default' or a model JSON file");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.reward.empty()) {
    cfg.reward = RewardSpec::preset(*parse_reward_variant(f.reward));
    cfg.train.reward_variant = cfg.reward.variant;
  }
  if (!f.model.empty()) cfg.model_source = f.model;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reminiscence-therapy dialogue simulator and revised Q-learning trainer"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train one Q-table per seed");
  add_common(train_cmd, train_flags);

  std::string eval_dir;
  std::vector<std::uint64_t> eval_seeds;
  auto* eval_cmd = app.add_subcommand("evaluate", "Build evaluation reports for a training run");
  eval_cmd->add_option("--out", eval_dir, "Run directory written by train")->required();
  eval_cmd->add_option("--seed", eval_seeds, "Seed to evaluate; repeatable (default: all)");

  std::string validate_model_src = "default";
  std::uint64_t validate_model_seed = 0;
  auto* validate_cmd = app.add_subcommand("validate-model", "Check a transition model");
  validate_cmd->add_option("--model", validate_model_src, "'default' or a model JSON file");
  validate_cmd->add_option("--model-seed", validate_model_seed, "Seed of the default model");

  CommonFlags compare_flags;
  auto* compare_cmd =
      app.add_subcommand("compare-rewards", "Train under R1 and R2 and compare final policies");
  add_common(compare_cmd, compare_flags);

  CommonFlags trace_flags;
  std::string trace_policy;
  int trace_episodes = 20;
  std::string trace_file;
  auto* trace_cmd = app.add_subcommand("trace", "Roll out a policy and print interaction traces");
  add_common(trace_cmd, trace_flags);
  trace_cmd->add_option("--policy", trace_policy, "Policy JSON (e.g. final_policy.json)")
      ->required();
  trace_cmd->add_option("--episodes", trace_episodes, "Number of experiments")
      ->check(CLI::PositiveNumber);
  trace_cmd->add_option("--file", trace_file, "Write the CSV here instead of stdout");

  std::uint64_t export_seed = 0;
  std::string export_path;
  auto* export_cmd = app.add_subcommand("export-model", "Write the default model as JSON");
  export_cmd->add_option("--model-seed", export_seed, "Generator seed");
  export_cmd->add_option("--file", export_path, "Destination file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors count as validation failures.
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*train_cmd) {
      for (const auto& a : cmd_train(build_config(train_flags))) {
        std::cout << "seed " << a.seed << " -> " << a.dir.string() << "\n";
      }
      return kOk;
    }
    if (*eval_cmd) {
      const bool ok = cmd_evaluate(eval_dir, eval_seeds);
      if (!ok) std::cerr << "Monte-Carlo estimate outside tolerance; see dp_check.json\n";
      return ok ? kOk : kValidationFailure;
    }
    if (*validate_cmd) {
      const ValidationOutcome out = cmd_validate_model(validate_model_src, validate_model_seed);
      std::cout << out.text;
      return out.report.ok() ? kOk : kValidationFailure;
    }
    if (*compare_cmd) {
      const ExperimentConfig cfg = build_config(compare_flags);
      for (const auto& c : cmd_compare_rewards(cfg)) {
        std::cout << "seed " << c.seed << "\n" << comparison_csv(c);
      }
      return kOk;
    }
    if (*trace_cmd) {
      const ExperimentConfig cfg = build_config(trace_flags);
      nlohmann::json pj = read_json_file(trace_policy);
      if (pj.contains("policy")) pj = pj.at("policy");
      const PolicyTable policy = policy_from_json(pj);
      const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();
      const std::string csv = cmd_trace(cfg, policy, seed, trace_episodes);
      if (trace_file.empty()) {
        std::cout << csv;
      } else {
        write_new_file(trace_file, csv);
      }
      return kOk;
    }
    if (*export_cmd) {
      write_new_file(export_path, model_file_contents(default_model(export_seed)));
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kRuntimeError;
}

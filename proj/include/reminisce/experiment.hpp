#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "reminisce/environment.hpp"
#include "reminisce/evaluation.hpp"
#include "reminisce/patient_model.hpp"
#include "reminisce/qlearning.hpp"

namespace reminisce {

/// Invalid configuration or inputs; maps to exit status 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  TrainConfig train;
  EnvConfig env;
  EvalConfig eval;
  /// "default" or a path to a model JSON file.
  std::string model_source = "default";
  std::uint64_t model_seed = 0;
  RewardSpec reward = RewardSpec::r1();
  std::optional<ChoiceDistribution> choice_override;
  std::filesystem::path output_dir = "runs/default";
  std::vector<std::uint64_t> seeds{0};

  /// Throws ConfigError.
  void validate() const;
};

/// Config file format; every field optional, missing ones keep the defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "R1", "R2" or an object with rows a2/a3/generic and optional
/// emotion/confusion components.
RewardSpec reward_from_json(const nlohmann::json& j);
nlohmann::ordered_json reward_to_json(const RewardSpec& spec);

/// Loads or generates the transition model and applies the choice override.
/// Throws ConfigError if the file is missing or structurally invalid.
TransitionModel resolve_model(const ExperimentConfig& cfg);

/// Per-seed run directory: <output_dir>/seed_<seed>.
std::filesystem::path seed_dir(const std::filesystem::path& output_dir, std::uint64_t seed);

struct SeedArtifacts {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
};

/// Trains every configured seed and writes qtable.json, trainlog.csv and
/// manifest.json into each seed directory. Existing artifacts are never
/// overwritten.
std::vector<SeedArtifacts> cmd_train(const ExperimentConfig& cfg);

/// Reads a seed directory's manifest, replays training deterministically,
/// checks the replay against the stored artifact hashes and writes
/// curves.csv, policy_freq.json, final_policy.json, traces.csv,
/// trace_summary.csv and dp_check.json. Returns false if any Monte-Carlo
/// estimate disagrees with the exact value beyond tolerance.
bool cmd_evaluate_seed(const std::filesystem::path& dir);

/// Runs cmd_evaluate_seed for every seed directory listed by `seeds`, or all
/// seed_* directories when `seeds` is empty.
bool cmd_evaluate(const std::filesystem::path& run_dir, const std::vector<std::uint64_t>& seeds);

struct ValidationOutcome {
  ModelConstraintReport report;
  std::string text;
};

/// `source` is "default" (generated with `model_seed`) or a model file path.
ValidationOutcome cmd_validate_model(const std::string& source, std::uint64_t model_seed);

std::string format_constraint_report(const ModelConstraintReport& report);

struct RewardComparison {
  std::uint64_t seed = 0;
  PolicyTable r1;
  PolicyTable r2;
};

/// Trains under R1 and R2 with shared seeds and writes
/// <output_dir>/compare_rewards/seed_<N>.csv and summary.json.
std::vector<RewardComparison> cmd_compare_rewards(const ExperimentConfig& cfg);

/// 18 rows: state_index,state,label,R1,R2.
std::string comparison_csv(const RewardComparison& c);

/// Rolls out `policy` `experiments` times and returns traces in the
/// step,state,action,choice layout.
std::string cmd_trace(const ExperimentConfig& cfg, const PolicyTable& policy,
                      std::uint64_t seed, int experiments);

/// Serialized transition model, for export.
std::string model_file_contents(const TransitionModel& m);

}  // namespace reminisce

#include "reminisce/experiment.hpp"

#include <algorithm>
#include <sstream>

#include "reminisce/io_util.hpp"
#include "reminisce/serialization.hpp"

namespace reminisce {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kQTable = "qtable.json";
constexpr const char* kTrainLog = "trainlog.csv";

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

RewardSpec::ResponseRow read_row(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 3) {
    throw ConfigError(std::string("custom reward needs a 3-entry '") + key + "' row (NR, IR, RR)");
  }
  return j.at(key).get<RewardSpec::ResponseRow>();
}

std::string_view to_string(DelayedUpdateAction a) {
  return a == DelayedUpdateAction::GiveChoices ? "give_choices" : "comfort";
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    train.validate();
    eval.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (env.max_rounds < 0 || env.max_triggers < 1 || env.forced_choice_streak < 1) {
    throw ConfigError("invalid environment limits");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (train.snapshot_window != eval.snapshot_window) {
    throw ConfigError("snapshot windows of training and evaluation differ");
  }
  if (train.total_episodes() < train.snapshot_window) {
    throw ConfigError("training has fewer episodes than the snapshot window");
  }
  if (model_source != "default" && !fs::exists(model_source)) {
    throw ConfigError("model file not found: " + model_source);
  }
  if (choice_override) {
    double sum = 0.0;
    for (double p : *choice_override) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("choice probabilities must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw ConfigError("choice probabilities must sum to 1");
    }
  }
}

RewardSpec reward_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto v = parse_reward_variant(j.get<std::string>());
    if (!v || *v == RewardVariant::Custom) {
      throw ConfigError("reward preset must be R1 or R2");
    }
    return RewardSpec::preset(*v);
  }
  if (!j.is_object()) throw ConfigError("reward must be a preset name or an object");
  RewardSpec spec;
  spec.variant = RewardVariant::Custom;
  spec.moderate_row = read_row(j, "a2");
  spec.difficult_row = read_row(j, "a3");
  spec.generic_row = read_row(j, "generic");
  if (j.contains("emotion")) spec.emotion = j.at("emotion").get<std::array<double, 3>>();
  if (j.contains("confusion")) spec.confusion = j.at("confusion").get<std::array<double, 2>>();
  return spec;
}

nlohmann::ordered_json reward_to_json(const RewardSpec& spec) {
  if (spec.variant != RewardVariant::Custom) return std::string(to_string(spec.variant));
  return {{"a2", spec.moderate_row},
          {"a3", spec.difficult_row},
          {"generic", spec.generic_row},
          {"emotion", spec.emotion},
          {"confusion", spec.confusion}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  if (j.contains("train")) {
    const auto& t = j.at("train");
    read_field(t, "alpha", cfg.train.alpha);
    read_field(t, "gamma", cfg.train.gamma);
    read_field(t, "epsilon", cfg.train.epsilon);
    read_field(t, "epochs", cfg.train.epochs);
    read_field(t, "episodes_per_epoch", cfg.train.episodes_per_epoch);
    read_field(t, "probe_episode", cfg.train.probe_episode);
    read_field(t, "snapshot_window", cfg.train.snapshot_window);
    if (t.contains("delayed_update")) {
      const std::string mode = t.at("delayed_update").get<std::string>();
      if (mode == "give_choices") {
        cfg.train.delayed_update = DelayedUpdateAction::GiveChoices;
      } else if (mode == "comfort") {
        cfg.train.delayed_update = DelayedUpdateAction::Comfort;
      } else {
        throw ConfigError("delayed_update must be 'give_choices' or 'comfort'");
      }
    }
  }
  cfg.eval.snapshot_window = cfg.train.snapshot_window;
  if (j.contains("environment")) {
    const auto& e = j.at("environment");
    read_field(e, "max_rounds", cfg.env.max_rounds);
    read_field(e, "max_triggers", cfg.env.max_triggers);
    read_field(e, "forced_choice_streak", cfg.env.forced_choice_streak);
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    read_field(e, "probe_rollouts", cfg.eval.probe_rollouts);
    read_field(e, "top_k", cfg.eval.top_k);
    read_field(e, "selection_rollouts", cfg.eval.selection_rollouts);
    read_field(e, "trace_experiments", cfg.eval.trace_experiments);
    read_field(e, "oracle_rollouts", cfg.eval.oracle_rollouts);
    read_field(e, "oracle_tolerance_se", cfg.eval.oracle_tolerance_se);
  }
  read_field(j, "model", cfg.model_source);
  read_field(j, "model_seed", cfg.model_seed);
  if (j.contains("reward")) cfg.reward = reward_from_json(j.at("reward"));
  cfg.train.reward_variant = cfg.reward.variant;
  if (j.contains("choice") && !j.at("choice").is_null()) {
    const auto& c = j.at("choice");
    if (!c.is_object() || !c.contains("stop") || !c.contains("continue") || !c.contains("change")) {
      throw ConfigError("choice override needs stop, continue and change");
    }
    cfg.choice_override = ChoiceDistribution{c.at("stop").get<double>(),
                                             c.at("continue").get<double>(),
                                             c.at("change").get<double>()};
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  read_field(j, "seeds", cfg.seeds);
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["train"] = {{"alpha", cfg.train.alpha},
                {"gamma", cfg.train.gamma},
                {"epsilon", cfg.train.epsilon},
                {"epochs", cfg.train.epochs},
                {"episodes_per_epoch", cfg.train.episodes_per_epoch},
                {"probe_episode", cfg.train.probe_episode},
                {"snapshot_window", cfg.train.snapshot_window},
                {"delayed_update", std::string(to_string(cfg.train.delayed_update))}};
  j["environment"] = {{"max_rounds", cfg.env.max_rounds},
                      {"max_triggers", cfg.env.max_triggers},
                      {"forced_choice_streak", cfg.env.forced_choice_streak}};
  j["evaluation"] = {{"probe_rollouts", cfg.eval.probe_rollouts},
                     {"top_k", cfg.eval.top_k},
                     {"selection_rollouts", cfg.eval.selection_rollouts},
                     {"trace_experiments", cfg.eval.trace_experiments},
                     {"oracle_rollouts", cfg.eval.oracle_rollouts},
                     {"oracle_tolerance_se", cfg.eval.oracle_tolerance_se}};
  j["model"] = cfg.model_source;
  j["model_seed"] = cfg.model_seed;
  j["reward"] = reward_to_json(cfg.reward);
  if (cfg.choice_override) {
    const auto& c = *cfg.choice_override;
    j["choice"] = {{"stop", c[0]}, {"continue", c[1]}, {"change", c[2]}};
  }
  j["output_dir"] = cfg.output_dir.string();
  j["seeds"] = cfg.seeds;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  try {
    return config_from_json(read_json_file(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TransitionModel resolve_model(const ExperimentConfig& cfg) {
  TransitionModel m;
  if (cfg.model_source == "default") {
    m = default_model(cfg.model_seed);
  } else {
    try {
      m = load_model(cfg.model_source);
    } catch (const ModelError& e) {
      throw ConfigError(e.what());
    }
  }
  if (cfg.choice_override) {
    m.choice.fill(*cfg.choice_override);
    m.choice_state_conditioned = false;
  }
  return m;
}

std::string model_file_contents(const TransitionModel& m) { return dump_json(model_to_json(m)); }

fs::path seed_dir(const fs::path& output_dir, std::uint64_t seed) {
  return output_dir / ("seed_" + std::to_string(seed));
}

namespace {

struct TrainedSeed {
  std::string qtable;
  std::string trainlog;
  TrainResult result;
};

TrainedSeed run_training(const ExperimentConfig& cfg, const TransitionModel& model,
                         std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainedSeed out;
  out.result = train(tc, model, cfg.reward, cfg.env);
  out.qtable = dump_json(qtable_to_json(out.result.q));
  out.trainlog = trainlog_csv(out.result.log);
  return out;
}

ExperimentConfig single_seed(ExperimentConfig cfg, std::uint64_t seed) {
  cfg.seeds = {seed};
  return cfg;
}

}  // namespace

std::vector<SeedArtifacts> cmd_train(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.model_source != "default") cfg.model_source = fs::absolute(cfg.model_source).string();
  cfg.validate();
  const TransitionModel model = resolve_model(cfg);
  const std::string model_hash = fnv1a_hex(model_file_contents(model));

  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = seed_dir(cfg.output_dir, seed);
    for (const char* name : {kManifest, kQTable, kTrainLog}) {
      if (fs::exists(dir / name)) throw IoError("refusing to overwrite " + (dir / name).string());
    }
  }

  std::vector<SeedArtifacts> written;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = seed_dir(cfg.output_dir, seed);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const TrainedSeed trained = run_training(cfg, model, seed);
    nlohmann::ordered_json manifest;
    manifest["seed"] = seed;
    manifest["config"] = config_to_json(single_seed(cfg, seed));
    manifest["model"] = {{"source", cfg.model_source},
                         {"label", model.label},
                         {"hash", model_hash}};
    manifest["artifacts"] = {{kQTable, fnv1a_hex(trained.qtable)},
                             {kTrainLog, fnv1a_hex(trained.trainlog)}};
    write_new_file(dir / kQTable, trained.qtable);
    write_new_file(dir / kTrainLog, trained.trainlog);
    write_new_file(dir / kManifest, dump_json(manifest));
    written.push_back({seed, dir});
  }
  return written;
}

bool cmd_evaluate_seed(const fs::path& dir) {
  if (!fs::exists(dir / kManifest) || !fs::exists(dir / kQTable) || !fs::exists(dir / kTrainLog)) {
    throw ConfigError("missing training artifacts in " + dir.string());
  }
  const nlohmann::json manifest = read_json_file(dir / kManifest);
  const ExperimentConfig cfg = config_from_json(manifest.at("config"));
  cfg.validate();
  const std::uint64_t seed = manifest.at("seed").get<std::uint64_t>();
  const TransitionModel model = resolve_model(cfg);
  if (fnv1a_hex(model_file_contents(model)) != manifest.at("model").at("hash").get<std::string>()) {
    throw ConfigError("transition model no longer matches the manifest in " + dir.string());
  }
  const auto& artifacts = manifest.at("artifacts");
  for (const char* name : {kQTable, kTrainLog}) {
    if (fnv1a_hex(read_text_file(dir / name)) != artifacts.at(name).get<std::string>()) {
      throw ConfigError(std::string(name) + " does not match its manifest hash in " + dir.string());
    }
  }

  // The report needs per-episode policy snapshots, which are regenerated by
  // replaying the deterministic training run.
  const TrainedSeed replay = run_training(cfg, model, seed);
  if (fnv1a_hex(replay.qtable) != artifacts.at(kQTable).get<std::string>() ||
      fnv1a_hex(replay.trainlog) != artifacts.at(kTrainLog).get<std::string>()) {
    throw ConfigError("training replay diverged from stored artifacts in " + dir.string());
  }

  const Environment env(model, cfg.reward, cfg.env);
  const EvalReport report = build_report(replay.result.log, env, seed, cfg.eval);
  write_new_file(dir / "curves.csv", curves_csv(report));
  write_new_file(dir / "policy_freq.json", dump_json(policy_frequency_json(report.policy_frequency)));
  write_new_file(dir / "final_policy.json", dump_json(final_policy_json(report)));
  write_new_file(dir / "traces.csv", traces_csv(report.traces));
  write_new_file(dir / "trace_summary.csv", trace_summary_csv(report.traces));
  write_new_file(dir / "dp_check.json",
                 dump_json(oracle_checks_json(report.oracle_checks, cfg.eval.oracle_tolerance_se)));
  return std::all_of(report.oracle_checks.begin(), report.oracle_checks.end(),
                     [](const OracleCheck& c) { return c.within_tolerance; });
}

bool cmd_evaluate(const fs::path& run_dir, const std::vector<std::uint64_t>& seeds) {
  std::vector<fs::path> dirs;
  if (seeds.empty()) {
    if (!fs::is_directory(run_dir)) throw ConfigError("run directory not found: " + run_dir.string());
    for (const auto& entry : fs::directory_iterator(run_dir)) {
      if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0) {
        dirs.push_back(entry.path());
      }
    }
    std::sort(dirs.begin(), dirs.end());
  } else {
    for (std::uint64_t s : seeds) dirs.push_back(seed_dir(run_dir, s));
  }
  if (dirs.empty()) throw ConfigError("no seed directories under " + run_dir.string());
  bool ok = true;
  for (const auto& d : dirs) ok = cmd_evaluate_seed(d) && ok;
  return ok;
}

std::string format_constraint_report(const ModelConstraintReport& report) {
  std::ostringstream out;
  if (!report.structurally_valid()) {
    out << "structural errors: " << report.structural.size() << "\n";
    for (const auto& e : report.structural) out << "  STRUCTURE " << e << "\n";
    return out.str();
  }
  out << "constraints checked: " << report.constraints.size()
      << ", violations: " << report.violations() << "\n";
  for (const auto& c : report.constraints) {
    if (c.satisfied) continue;
    out << "  " << c.id << " actions=";
    for (std::size_t i = 0; i < c.actions.size(); ++i) {
      out << (i ? "," : "") << action_name(c.actions[i]);
    }
    out << " states=";
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      out << (i ? "," : "") << state_label(decode_state(c.states[i]));
    }
    out << " " << c.detail << "\n";
  }
  return out.str();
}

ValidationOutcome cmd_validate_model(const std::string& source, std::uint64_t model_seed) {
  TransitionModel m;
  if (source == "default") {
    m = default_model(model_seed);
  } else {
    if (!fs::exists(source)) throw ConfigError("model file not found: " + source);
    m = load_model(source, /*check_structure=*/false);
  }
  ValidationOutcome out;
  out.report = validate_model(m);
  out.text = format_constraint_report(out.report);
  return out;
}

std::string comparison_csv(const RewardComparison& c) {
  std::string out = "state_index,state,label,R1,R2\n";
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const PwdState st = decode_state(s);
    out += std::to_string(s) + "," + csv_field(state_triple(st)) + "," +
           csv_field(state_label(st)) + "," + std::string(action_name(c.r1.action(s))) + "," +
           std::string(action_name(c.r2.action(s))) + "\n";
  }
  return out;
}

std::vector<RewardComparison> cmd_compare_rewards(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  const TransitionModel model = resolve_model(cfg);
  const fs::path dir = cfg.output_dir / "compare_rewards";
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path f = dir / ("seed_" + std::to_string(seed) + ".csv");
    if (fs::exists(f)) throw IoError("refusing to overwrite " + f.string());
  }
  if (fs::exists(dir / "summary.json")) throw IoError("refusing to overwrite summary.json");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<RewardComparison> results;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (std::uint64_t seed : cfg.seeds) {
    RewardComparison cmp;
    cmp.seed = seed;
    for (RewardVariant v : {RewardVariant::R1, RewardVariant::R2}) {
      ExperimentConfig variant_cfg = cfg;
      variant_cfg.reward = RewardSpec::preset(v);
      variant_cfg.train.reward_variant = v;
      const TrainedSeed trained = run_training(variant_cfg, model, seed);
      const Environment env(model, variant_cfg.reward, cfg.env);
      EvalConfig eval = cfg.eval;
      eval.trace_experiments = 0;
      const EvalReport report = build_report(trained.result.log, env, seed, eval);
      (v == RewardVariant::R1 ? cmp.r1 : cmp.r2) = report.final_policy;
    }
    const std::string csv = comparison_csv(cmp);
    write_new_file(dir / ("seed_" + std::to_string(seed) + ".csv"), csv);
    summary.push_back({{"seed", seed}, {"R1", cmp.r1.code()}, {"R2", cmp.r2.code()}});
    results.push_back(cmp);
  }
  write_new_file(dir / "summary.json", dump_json(summary));
  return results;
}

std::string cmd_trace(const ExperimentConfig& cfg, const PolicyTable& policy, std::uint64_t seed,
                      int experiments) {
  cfg.validate();
  const Environment env(resolve_model(cfg), cfg.reward, cfg.env);
  const RolloutResult r = rollout_policy(policy, env, derive_seed(seed, StreamPurpose::FinalTraces),
                                         experiments, true);
  return traces_csv(r.traces);
}

}  // namespace reminisce

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reminisce/domain.hpp"
#include "reminisce/environment.hpp"
#include "reminisce/patient_model.hpp"
#include "reminisce/random.hpp"

namespace reminisce {

/// Action values for the learnable actions a1..a6. GiveChoices is
/// rule-triggered and has no column.
class QTable {
 public:
  using Row = std::array<double, kNumLearnableActions>;

  QTable() { clear(); }

  double& at(StateIndex s, RobotAction a) { return values_.at(s).at(learnable_column(a)); }
  double at(StateIndex s, RobotAction a) const { return values_.at(s).at(learnable_column(a)); }
  const Row& row(StateIndex s) const { return values_.at(s); }
  Row& row(StateIndex s) { return values_.at(s); }

  double max_value(StateIndex s) const;
  /// Lowest-index action among the maxima.
  RobotAction best_action(StateIndex s) const;
  double sum() const;
  bool all_finite() const;
  void clear();

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  static int learnable_column(RobotAction a);

  std::array<Row, kNumStates> values_{};
};

/// Greedy action per state, restricted to a1..a6.
class PolicyTable {
 public:
  PolicyTable() { actions_.fill(RobotAction::EasyPrompt); }
  /// Throws std::invalid_argument if `a` is GiveChoices.
  static PolicyTable uniform(RobotAction a);

  RobotAction action(StateIndex s) const { return actions_.at(s); }
  RobotAction action(const PwdState& s) const { return actions_.at(encode_state(s)); }
  void set(StateIndex s, RobotAction a);

  /// Compact form "000512..." of zero-based action indices.
  std::string code() const;
  std::uint64_t hash() const;

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;
  friend auto operator<=>(const PolicyTable&, const PolicyTable&) = default;

 private:
  std::array<RobotAction, kNumStates> actions_{};
};

PolicyTable greedy_policy(const QTable& q);

/// Which action's step writes its update into the previous state-action pair.
/// GiveChoices is the default; Comfort exists for sensitivity runs.
enum class DelayedUpdateAction { GiveChoices, Comfort };

struct TrainConfig {
  double alpha = 0.05;
  double gamma = 0.95;
  double epsilon = 0.1;
  int epochs = 1500;
  int episodes_per_epoch = 30;
  std::uint64_t seed = 0;
  RewardVariant reward_variant = RewardVariant::R1;
  DelayedUpdateAction delayed_update = DelayedUpdateAction::GiveChoices;
  /// 1-based episode within each epoch whose greedy policy is probed.
  int probe_episode = 10;
  /// Greedy snapshots kept from the end of training.
  int snapshot_window = 600;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  long total_episodes() const { return static_cast<long>(epochs) * episodes_per_epoch; }
};

struct PreviousStep {
  PwdState state;
  RobotAction action;
};

/// One revised Q-learning update. For ordinary actions:
///   Q(s_t, a_t) += alpha * (r_t + gamma * max_a Q(s_next, a) - Q(s_t, a_t)).
/// For the delayed-update action (GiveChoices by default) the same target is
/// written into Q(previous.state, previous.action) and the step itself writes
/// no entry. The bootstrap term is dropped when `terminal`.
void update(QTable& q, const std::optional<PreviousStep>& previous, const PwdState& s_t,
            RobotAction a_t, double r_t, const PwdState& s_next, const TrainConfig& cfg,
            bool terminal);

/// epsilon-greedy over a1..a6: one uniform draw decides exploration, a
/// second draw picks the exploratory action.
RobotAction select_action(const QTable& q, const PwdState& s, double epsilon, RandomStream& rng);

struct EpochRecord {
  double average_return = 0.0;
  /// Mean over the epoch's episodes of the Q-table sum after each episode.
  double q_sum = 0.0;
  /// |q_sum_k - q_sum_{k-1}| / max(|q_sum_{k-1}|, DBL_MIN); 0 for the first epoch.
  double q_update = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<double> episode_returns;
  /// Greedy policy after the probe episode of each epoch.
  std::vector<PolicyTable> probe_policies;
  /// Greedy policy after each of the final `snapshot_window` episodes.
  std::vector<PolicyTable> snapshots;
};

struct TrainResult {
  QTable q;
  TrainLog log;
};

/// Runs one epsilon-greedy training episode, updating `q`. Returns the
/// undiscounted return.
double train_episode(QTable& q, const Environment& env, const TrainConfig& cfg,
                     RandomStream& rng);

/// Full schedule: epochs x episodes_per_epoch episodes sharing one Q-table,
/// seeded from derive_seed(cfg.seed, Training).
TrainResult train(const TrainConfig& cfg, const TransitionModel& model, const RewardSpec& spec,
                  const EnvConfig& env_cfg = {});

}  // namespace reminisce

#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>

#include "reminisce/domain.hpp"
#include "reminisce/patient_model.hpp"
#include "reminisce/random.hpp"

namespace reminisce {

struct EnvConfig {
  int max_rounds = 50;
  int max_triggers = 15;
  /// Consecutive bad moments that force GiveChoices.
  int forced_choice_streak = 2;
};

enum class DoneReason { None, StopChosen, MaxRounds, MaxTriggers };

std::string_view to_string(DoneReason r);

struct SessionState {
  PwdState current = kInitialState;
  std::optional<PwdState> previous;
  int round = 0;
  int triggers_discussed = 1;
  int bad_streak = 0;
  bool done = false;
  DoneReason done_reason = DoneReason::None;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

struct StepOutcome {
  PwdState next_state;
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::None;
  std::optional<PwdChoice> forced_choice_taken;
  int round = 0;
  int triggers_discussed = 1;
  int bad_streak = 0;
};

class EnvironmentError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One reminiscence session against a simulated PwD. The environment itself
/// is immutable; all per-episode state lives in SessionState.
class Environment {
 public:
  Environment(TransitionModel model, RewardSpec spec, EnvConfig config = {});

  SessionState reset() const;

  /// True when the bad-moment streak has reached the threshold; GiveChoices
  /// is then the only legal action.
  bool forced_action_required(const SessionState& ss) const;

  /// Advances `ss` by one robot action. Throws EnvironmentError when the
  /// session is done or the action is illegal in the current state.
  StepOutcome step(SessionState& ss, RobotAction a, RandomStream& rng) const;

  /// Same transition with the choice outcome supplied by the caller instead
  /// of sampled. Only valid for GiveChoices.
  StepOutcome step_with_choice(SessionState& ss, PwdChoice choice) const;

  const TransitionModel& model() const { return model_; }
  const RewardSpec& reward_spec() const { return spec_; }
  const EnvConfig& config() const { return config_; }

 private:
  void check_legal(const SessionState& ss, RobotAction a) const;
  StepOutcome finish(SessionState& ss, const PwdState& next, double r,
                     std::optional<PwdChoice> choice) const;

  TransitionModel model_;
  RewardSpec spec_;
  EnvConfig config_;
};

}  // namespace reminisce

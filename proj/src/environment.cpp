#include "reminisce/environment.hpp"

#include <string>

namespace reminisce {

std::string_view to_string(DoneReason r) {
  switch (r) {
    case DoneReason::None: return "none";
    case DoneReason::StopChosen: return "stop_chosen";
    case DoneReason::MaxRounds: return "max_rounds";
    case DoneReason::MaxTriggers: return "max_triggers";
  }
  return "?";
}

Environment::Environment(TransitionModel model, RewardSpec spec, EnvConfig config)
    : model_(std::move(model)), spec_(std::move(spec)), config_(config) {
  if (config_.max_rounds < 0 || config_.max_triggers < 1 || config_.forced_choice_streak < 1) {
    throw std::invalid_argument("invalid environment limits");
  }
}

SessionState Environment::reset() const {
  SessionState ss;
  if (config_.max_rounds == 0) {
    ss.done = true;
    ss.done_reason = DoneReason::MaxRounds;
  }
  return ss;
}

bool Environment::forced_action_required(const SessionState& ss) const {
  return ss.bad_streak >= config_.forced_choice_streak;
}

void Environment::check_legal(const SessionState& ss, RobotAction a) const {
  if (ss.done) throw EnvironmentError("step called on a finished session");
  const bool forced = forced_action_required(ss);
  if (forced && a != RobotAction::GiveChoices) {
    throw EnvironmentError(std::string("GiveChoices is forced, got ") +
                           std::string(action_name(a)));
  }
  if (!forced && a == RobotAction::GiveChoices) {
    throw EnvironmentError("GiveChoices is only legal after consecutive bad moments");
  }
}

StepOutcome Environment::step(SessionState& ss, RobotAction a, RandomStream& rng) const {
  check_legal(ss, a);
  if (a == RobotAction::GiveChoices) {
    return step_with_choice(ss, sample_choice(model_, ss.current, rng));
  }
  const PwdState next = sample_transition(model_, ss.current, a, rng);
  ss.bad_streak = is_bad(next) ? ss.bad_streak + 1 : 0;
  return finish(ss, next, reward(next, a, spec_), std::nullopt);
}

StepOutcome Environment::step_with_choice(SessionState& ss, PwdChoice choice) const {
  check_legal(ss, RobotAction::GiveChoices);
  PwdState next = ss.current;
  switch (choice) {
    case PwdChoice::Stop:
      ss.done = true;
      ss.done_reason = DoneReason::StopChosen;
      break;
    case PwdChoice::Continue:
      break;
    case PwdChoice::ChangeTrigger:
      next = kInitialState;
      if (ss.triggers_discussed >= config_.max_triggers) {
        ss.done = true;
        ss.done_reason = DoneReason::MaxTriggers;
      } else {
        ++ss.triggers_discussed;
      }
      break;
  }
  ss.bad_streak = 0;
  return finish(ss, next, reward(next, RobotAction::GiveChoices, spec_), choice);
}

StepOutcome Environment::finish(SessionState& ss, const PwdState& next, double r,
                                std::optional<PwdChoice> choice) const {
  ss.previous = ss.current;
  ss.current = next;
  ++ss.round;
  if (!ss.done && ss.round >= config_.max_rounds) {
    ss.done = true;
    ss.done_reason = DoneReason::MaxRounds;
  }
  StepOutcome out;
  out.next_state = next;
  out.reward = r;
  out.done = ss.done;
  out.done_reason = ss.done_reason;
  out.forced_choice_taken = choice;
  out.round = ss.round;
  out.triggers_discussed = ss.triggers_discussed;
  out.bad_streak = ss.bad_streak;
  return out;
}

}  // namespace reminisce

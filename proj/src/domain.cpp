#include "reminisce/domain.hpp"

#include <algorithm>
#include <stdexcept>

namespace reminisce {

PwdState decode_state(StateIndex index) {
  if (index < 0 || index >= kNumStates) {
    throw std::out_of_range("state index out of range: " + std::to_string(index));
  }
  const int c = index % kNumConfusions;
  const int e = (index / kNumConfusions) % kNumEmotions;
  const int r = index / (kNumConfusions * kNumEmotions);
  return PwdState{static_cast<ResponseRelevance>(r), static_cast<EmotionLevel>(e - 1),
                  static_cast<ConfusionState>(c)};
}

RobotAction action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw std::out_of_range("action index out of range: " + std::to_string(index));
  }
  return static_cast<RobotAction>(index);
}

std::string_view to_string(ResponseRelevance r) {
  switch (r) {
    case ResponseRelevance::NR: return "NR";
    case ResponseRelevance::IR: return "IR";
    case ResponseRelevance::RR: return "RR";
  }
  return "?";
}

std::string_view to_string(EmotionLevel e) {
  switch (e) {
    case EmotionLevel::Neg: return "Neg";
    case EmotionLevel::Neu: return "Neu";
    case EmotionLevel::Pos: return "Pos";
  }
  return "?";
}

std::string_view to_string(ConfusionState c) {
  return c == ConfusionState::Yes ? "Yes" : "No";
}

std::string_view to_string(PwdChoice c) {
  switch (c) {
    case PwdChoice::Stop: return "stop";
    case PwdChoice::Continue: return "continue";
    case PwdChoice::ChangeTrigger: return "change";
  }
  return "?";
}

namespace {
constexpr std::array<std::string_view, kNumActions> kActionNames{"a1", "a2", "a3", "a4",
                                                                 "a5", "a6", "a7"};
}

std::string_view action_name(RobotAction a) { return kActionNames.at(action_index(a)); }

std::optional<RobotAction> parse_action_name(std::string_view name) {
  const auto it = std::find(kActionNames.begin(), kActionNames.end(), name);
  if (it == kActionNames.end()) return std::nullopt;
  return static_cast<RobotAction>(it - kActionNames.begin());
}

std::optional<PwdChoice> parse_choice(std::string_view name) {
  if (name == "stop") return PwdChoice::Stop;
  if (name == "continue") return PwdChoice::Continue;
  if (name == "change") return PwdChoice::ChangeTrigger;
  return std::nullopt;
}

std::string state_label(const PwdState& s) {
  std::string out = "[";
  out += to_string(s.response);
  out += ", ";
  out += to_string(s.emotion);
  out += ", ";
  out += to_string(s.confusion);
  out += "]";
  return out;
}

std::string state_triple(const PwdState& s) {
  return "[" + std::to_string(static_cast<int>(s.response)) + ", " +
         std::to_string(static_cast<int>(s.emotion)) + ", " +
         std::to_string(static_cast<int>(s.confusion)) + "]";
}

std::string_view to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::R1: return "R1";
    case RewardVariant::R2: return "R2";
    case RewardVariant::Custom: return "Custom";
  }
  return "?";
}

std::optional<RewardVariant> parse_reward_variant(std::string_view name) {
  if (name == "R1") return RewardVariant::R1;
  if (name == "R2") return RewardVariant::R2;
  if (name == "Custom") return RewardVariant::Custom;
  return std::nullopt;
}

RewardSpec RewardSpec::r1() {
  RewardSpec spec;
  spec.moderate_row = {-2.0, 0.75, 2.0};
  spec.difficult_row = {-2.0, 1.75, 3.0};
  spec.generic_row = {-2.0, 0.3, 0.75};
  spec.variant = RewardVariant::R1;
  return spec;
}

RewardSpec RewardSpec::r2() {
  RewardSpec spec = r1();
  spec.difficult_row = {-2.0, 3.0, 10.0};
  spec.variant = RewardVariant::R2;
  return spec;
}

RewardSpec RewardSpec::preset(RewardVariant v) {
  switch (v) {
    case RewardVariant::R1: return r1();
    case RewardVariant::R2: return r2();
    case RewardVariant::Custom: break;
  }
  throw std::invalid_argument("no preset for a custom reward");
}

const RewardSpec::ResponseRow& RewardSpec::row_for(RobotAction a) const {
  switch (a) {
    case RobotAction::ModeratePrompt: return moderate_row;
    case RobotAction::DifficultPrompt: return difficult_row;
    default: return generic_row;
  }
}

double reward(const PwdState& next_state, RobotAction action, const RewardSpec& spec) {
  return spec.row_for(action)[static_cast<int>(next_state.response)] +
         spec.emotion[static_cast<int>(next_state.emotion) + 1] +
         spec.confusion[static_cast<int>(next_state.confusion)];
}

double min_reward(const RewardSpec& spec) {
  double lo = reward(decode_state(0), RobotAction::EasyPrompt, spec);
  for (StateIndex i = 0; i < kNumStates; ++i) {
    for (int a = 0; a < kNumActions; ++a) {
      lo = std::min(lo, reward(decode_state(i), static_cast<RobotAction>(a), spec));
    }
  }
  return lo;
}

double max_reward(const RewardSpec& spec) {
  double hi = reward(decode_state(0), RobotAction::EasyPrompt, spec);
  for (StateIndex i = 0; i < kNumStates; ++i) {
    for (int a = 0; a < kNumActions; ++a) {
      hi = std::max(hi, reward(decode_state(i), static_cast<RobotAction>(a), spec));
    }
  }
  return hi;
}

}  // namespace reminisce

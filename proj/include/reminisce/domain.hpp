#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reminisce {

// Integer codes match the trace encoding: response 0/1/2, emotion -1/0/1,
// confusion 0/1.
enum class ResponseRelevance : int { NR = 0, IR = 1, RR = 2 };
enum class EmotionLevel : int { Neg = -1, Neu = 0, Pos = 1 };
enum class ConfusionState : int { No = 0, Yes = 1 };

inline constexpr int kNumResponses = 3;
inline constexpr int kNumEmotions = 3;
inline constexpr int kNumConfusions = 2;
inline constexpr int kNumStates = kNumResponses * kNumEmotions * kNumConfusions;

struct PwdState {
  ResponseRelevance response = ResponseRelevance::NR;
  EmotionLevel emotion = EmotionLevel::Neu;
  ConfusionState confusion = ConfusionState::No;

  friend constexpr bool operator==(const PwdState&, const PwdState&) = default;
};

/// Session start and the state after a memory-trigger change.
inline constexpr PwdState kInitialState{ResponseRelevance::NR, EmotionLevel::Neu,
                                        ConfusionState::No};

/// Dense state index, response-major then emotion then confusion.
using StateIndex = int;

constexpr StateIndex encode_state(const PwdState& s) {
  const int r = static_cast<int>(s.response);
  const int e = static_cast<int>(s.emotion) + 1;
  const int c = static_cast<int>(s.confusion);
  return r * (kNumEmotions * kNumConfusions) + e * kNumConfusions + c;
}

/// Throws std::out_of_range for indices outside [0, 18).
PwdState decode_state(StateIndex index);

/// A state is a "bad moment" if the PwD shows negative emotion or confusion.
constexpr bool is_bad(const PwdState& s) {
  return s.emotion == EmotionLevel::Neg || s.confusion == ConfusionState::Yes;
}

/// Robot actions a1..a7. The zero-based index (0..6) is the trace encoding.
enum class RobotAction : int {
  EasyPrompt = 0,
  ModeratePrompt = 1,
  DifficultPrompt = 2,
  Repeat = 3,
  Explain = 4,
  Comfort = 5,
  GiveChoices = 6,
};

inline constexpr int kNumLearnableActions = 6;
inline constexpr int kNumActions = 7;

constexpr int action_index(RobotAction a) { return static_cast<int>(a); }
constexpr bool is_learnable(RobotAction a) { return action_index(a) < kNumLearnableActions; }

/// Throws std::out_of_range for indices outside [0, 7).
RobotAction action_from_index(int index);

enum class PwdChoice : int { Stop = 0, Continue = 1, ChangeTrigger = 2 };
inline constexpr int kNumChoices = 3;

std::string_view to_string(ResponseRelevance r);
std::string_view to_string(EmotionLevel e);
std::string_view to_string(ConfusionState c);
std::string_view to_string(PwdChoice c);
/// "a1".."a7".
std::string_view action_name(RobotAction a);
/// Parses "a1".."a7"; nullopt otherwise.
std::optional<RobotAction> parse_action_name(std::string_view name);
/// Parses "stop", "continue", "change".
std::optional<PwdChoice> parse_choice(std::string_view name);

/// "[NR, Neu, No]".
std::string state_label(const PwdState& s);
/// "[0, 0, 0]" as in the trace tables.
std::string state_triple(const PwdState& s);

enum class RewardVariant { R1, R2, Custom };

std::string_view to_string(RewardVariant v);
std::optional<RewardVariant> parse_reward_variant(std::string_view name);

/// Additive reward: response component keyed by the action's row class, plus
/// emotion and confusion components of the state the PwD ends up in.
struct RewardSpec {
  using ResponseRow = std::array<double, kNumResponses>;  // NR, IR, RR

  ResponseRow moderate_row{};   // a2
  ResponseRow difficult_row{};  // a3
  ResponseRow generic_row{};    // every other action, including a7
  std::array<double, kNumEmotions> emotion{-3.0, 1.0, 2.0};  // Neg, Neu, Pos
  std::array<double, kNumConfusions> confusion{2.0, -2.5};   // No, Yes
  RewardVariant variant = RewardVariant::Custom;

  static RewardSpec r1();
  static RewardSpec r2();
  static RewardSpec preset(RewardVariant v);

  const ResponseRow& row_for(RobotAction a) const;

  friend bool operator==(const RewardSpec&, const RewardSpec&) = default;
};

double reward(const PwdState& next_state, RobotAction action, const RewardSpec& spec);

/// Smallest and largest reward over all states and actions.
double min_reward(const RewardSpec& spec);
double max_reward(const RewardSpec& spec);

}  // namespace reminisce

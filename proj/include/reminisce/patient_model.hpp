#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "reminisce/domain.hpp"
#include "reminisce/random.hpp"

namespace reminisce {

using ProbabilityRow = std::array<double, kNumStates>;
/// Row = current state index, column = next state index.
using TransitionMatrix = std::array<ProbabilityRow, kNumStates>;
/// Stop, Continue, ChangeTrigger.
using ChoiceDistribution = std::array<double, kNumChoices>;

inline constexpr double kStochasticTolerance = 1e-6;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stochastic behaviour of a simulated PwD: one transition matrix per
/// learnable robot action and the outcome distribution of GiveChoices.
/// Treated as an immutable value once built.
struct TransitionModel {
  std::array<TransitionMatrix, kNumLearnableActions> matrices{};
  /// Indexed by current state. Identical rows unless `choice_state_conditioned`.
  std::array<ChoiceDistribution, kNumStates> choice{};
  bool choice_state_conditioned = false;
  std::string label;
  std::string provenance;

  const ProbabilityRow& row(RobotAction a, const PwdState& s) const {
    return matrices.at(action_index(a))[encode_state(s)];
  }
  const ChoiceDistribution& choice_for(const PwdState& s) const {
    return choice[encode_state(s)];
  }

  friend bool operator==(const TransitionModel&, const TransitionModel&) = default;
};

/// Probability-structure problems: out-of-range entries, rows or choice
/// distributions that do not sum to 1 within `kStochasticTolerance`.
std::vector<std::string> structural_errors(const TransitionModel& m);

struct ConstraintResult {
  std::string id;  // "C1-response", "C2", ...
  std::vector<RobotAction> actions;
  std::vector<StateIndex> states;
  bool satisfied = true;
  std::string detail;
};

struct ModelConstraintReport {
  std::vector<std::string> structural;
  std::vector<ConstraintResult> constraints;

  bool structurally_valid() const { return structural.empty(); }
  std::size_t violations() const;
  bool ok() const { return structurally_valid() && violations() == 0; }
};

/// Checks the qualitative behaviour rules over next-state marginals:
///   C1 harder prompts lower P(RR) and P(Pos) and raise P(confused);
///   C2 a bad current state never has higher P(RR) under a prompt than a good
///      state with the same response;
///   C3 from confused states, Repeat/Explain respond at least as often as a
///      difficult prompt and do not raise P(Neg);
///   C4 from Neg states, Comfort has P(RR) at least and P(Neg) at most that of
///      a difficult prompt.
/// Constraint evaluation is skipped when the structure is invalid.
ModelConstraintReport validate_model(const TransitionModel& m);

/// Knobs of the default generator. These are artifact defaults chosen to
/// satisfy the behaviour rules, not measured patient data.
struct DefaultModelParams {
  /// P(confusion cleared) after Repeat or Explain from a confused state.
  double confusion_clear_prob = 0.6;
  /// Relative per-seed perturbation of the baseline levels.
  double jitter = 0.08;
  ChoiceDistribution choice{0.2, 0.4, 0.4};
};

TransitionModel default_model(std::uint64_t seed, const DefaultModelParams& params = {});

/// Next state drawn by inverse CDF over the row of (s, a); one uniform draw.
/// Throws std::invalid_argument for GiveChoices.
PwdState sample_transition(const TransitionModel& m, const PwdState& s, RobotAction a,
                           RandomStream& rng);

PwdChoice sample_choice(const TransitionModel& m, const PwdState& s, RandomStream& rng);

/// Serialization to {"actions": {"a1": [[18x18]], ...}, "choice": {...} or
/// [18 x {...}], "metadata": {...}}.
nlohmann::json model_to_json(const TransitionModel& m);
/// Throws ModelError on schema violations, and on stochasticity violations
/// unless `check_structure` is false (used to report them instead).
TransitionModel model_from_json(const nlohmann::json& j, bool check_structure = true);
TransitionModel load_model(const std::filesystem::path& path, bool check_structure = true);
void save_model(const TransitionModel& m, const std::filesystem::path& path);

}  // namespace reminisce

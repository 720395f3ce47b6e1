#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reminisce/domain.hpp"
#include "reminisce/environment.hpp"
#include "reminisce/qlearning.hpp"
#include "reminisce/random.hpp"

namespace reminisce {

struct TraceRow {
  int step = 0;
  PwdState state;
  RobotAction action = RobotAction::EasyPrompt;
  std::optional<PwdChoice> choice;
  double reward = 0.0;
};

/// One session, one row per robot action, steps numbered from 0.
struct EpisodeTrace {
  std::vector<TraceRow> rows;
  double total_return = 0.0;
  DoneReason done_reason = DoneReason::None;
};

/// Picks a learnable action for a non-forced step.
using ActionChooser = std::function<RobotAction(const PwdState&, RandomStream&)>;

/// Plays one session; GiveChoices is inserted whenever it is forced.
EpisodeTrace run_episode(const Environment& env, const ActionChooser& choose, RandomStream& rng);

struct RolloutResult {
  double mean_return = 0.0;
  double std_error = 0.0;
  int n = 0;
  std::vector<double> returns;
  std::vector<EpisodeTrace> traces;  // filled only when requested
};

/// Mean and standard error of the mean (sample std / sqrt(n), 0 for n = 1).
std::pair<double, double> mean_and_std_error(const std::vector<double>& xs);

/// Seed of rollout `i` in a batch seeded with `base`.
constexpr std::uint64_t rollout_seed(std::uint64_t base, std::uint64_t i) {
  return derive_seed(base, StreamPurpose::Custom, i);
}

/// n independent greedy rollouts of `policy`; rollout i draws from
/// RandomStream(rollout_seed(seed, i)). Returns are undiscounted.
RolloutResult rollout_policy(const PolicyTable& policy, const Environment& env, std::uint64_t seed,
                             int n, bool keep_traces = false);

/// Uniform choice over a1..a6 on every non-forced step.
RolloutResult random_baseline(const Environment& env, std::uint64_t seed, int episodes);

/// Exact expected undiscounted return of `policy` by backward induction over
/// (round, triggers discussed, bad streak, PwD state), with GiveChoices steps
/// expanded over the three choice outcomes.
double exact_policy_value(const PolicyTable& policy, const Environment& env);

struct EvalConfig {
  int probe_rollouts = 40;
  int snapshot_window = 600;
  int top_k = 5;
  int selection_rollouts = 1000;
  int trace_experiments = 20;
  /// Rollouts of the final policy compared against the exact value.
  int oracle_rollouts = 100000;
  /// Allowed |MC mean - exact| in standard errors.
  double oracle_tolerance_se = 4.0;

  void validate() const;
};

struct PolicyCount {
  PolicyTable policy;
  int count = 0;
};

struct CandidateResult {
  PolicyTable policy;
  int count = 0;
  double mean_return = 0.0;
  double std_error = 0.0;
  int n = 0;
  double exact_value = 0.0;
};

struct OracleCheck {
  std::string label;
  PolicyTable policy;
  double mc_mean = 0.0;
  double std_error = 0.0;
  int n = 0;
  double exact_value = 0.0;
  bool within_tolerance = true;
};

struct EvalReport {
  std::vector<double> epsilon_greedy_curve;
  std::vector<double> greedy_curve;
  std::vector<double> random_curve;
  std::vector<double> q_sum_series;
  std::vector<double> q_update_series;
  /// Sorted by count descending, then policy hash ascending.
  std::vector<PolicyCount> policy_frequency;
  std::vector<CandidateResult> candidates;
  PolicyTable final_policy;
  CandidateResult final_result;
  std::vector<EpisodeTrace> traces;
  std::vector<OracleCheck> oracle_checks;
};

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frequency of each distinct policy, ordered as in EvalReport.
std::vector<PolicyCount> count_policies(const std::vector<PolicyTable>& snapshots);

/// Index of the candidate with the highest mean return; ties go to the lowest
/// policy hash.
std::size_t select_final(const std::vector<CandidateResult>& candidates);

/// Assembles curves, selects the final policy among the most frequent
/// snapshots and traces it. `seed` is the run's root seed; every stage draws
/// from its own derived stream. Throws ReportError if the log holds fewer
/// snapshots than the window.
EvalReport build_report(const TrainLog& log, const Environment& env, std::uint64_t seed,
                        const EvalConfig& cfg = {});

/// Compares a Monte-Carlo estimate with the exact value.
OracleCheck check_against_exact(std::string label, const PolicyTable& policy,
                                const Environment& env, std::uint64_t seed, int n,
                                double tolerance_se);

}  // namespace reminisce

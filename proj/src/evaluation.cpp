#include "reminisce/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace reminisce {

EpisodeTrace run_episode(const Environment& env, const ActionChooser& choose, RandomStream& rng) {
  EpisodeTrace trace;
  SessionState ss = env.reset();
  while (!ss.done) {
    TraceRow row;
    row.step = ss.round;
    row.state = ss.current;
    row.action = env.forced_action_required(ss) ? RobotAction::GiveChoices
                                                : choose(ss.current, rng);
    const StepOutcome out = env.step(ss, row.action, rng);
    row.choice = out.forced_choice_taken;
    row.reward = out.reward;
    trace.total_return += out.reward;
    trace.rows.push_back(row);
  }
  trace.done_reason = ss.done_reason;
  return trace;
}

std::pair<double, double> mean_and_std_error(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

namespace {

RolloutResult rollouts(const Environment& env, const ActionChooser& choose, std::uint64_t seed,
                       int n, bool keep_traces) {
  if (n < 1) throw std::invalid_argument("rollout count must be >= 1");
  RolloutResult result;
  result.n = n;
  result.returns.reserve(n);
  for (int i = 0; i < n; ++i) {
    RandomStream rng(rollout_seed(seed, static_cast<std::uint64_t>(i)));
    EpisodeTrace trace = run_episode(env, choose, rng);
    result.returns.push_back(trace.total_return);
    if (keep_traces) result.traces.push_back(std::move(trace));
  }
  std::tie(result.mean_return, result.std_error) = mean_and_std_error(result.returns);
  return result;
}

}  // namespace

RolloutResult rollout_policy(const PolicyTable& policy, const Environment& env, std::uint64_t seed,
                             int n, bool keep_traces) {
  const ActionChooser greedy = [&policy](const PwdState& s, RandomStream&) {
    return policy.action(s);
  };
  return rollouts(env, greedy, seed, n, keep_traces);
}

RolloutResult random_baseline(const Environment& env, std::uint64_t seed, int episodes) {
  const ActionChooser uniform = [](const PwdState&, RandomStream& rng) {
    return static_cast<RobotAction>(rng.uniform_index(kNumLearnableActions));
  };
  return rollouts(env, uniform, seed, episodes, false);
}

double exact_policy_value(const PolicyTable& policy, const Environment& env) {
  const EnvConfig& cfg = env.config();
  const TransitionModel& model = env.model();
  const RewardSpec& spec = env.reward_spec();
  if (cfg.max_rounds == 0) return 0.0;

  const int streaks = cfg.forced_choice_streak + 1;  // 0 .. threshold (saturating)
  const int triggers = cfg.max_triggers;             // 1 .. max, stored at t - 1
  const auto layer_index = [&](int t, int k, StateIndex s) {
    return ((t - 1) * streaks + k) * kNumStates + s;
  };
  const std::size_t layer_size = static_cast<std::size_t>(triggers) * streaks * kNumStates;
  // `next` holds values at round r + 1; zero beyond the horizon.
  std::vector<double> next(layer_size, 0.0);
  std::vector<double> cur(layer_size, 0.0);

  const double r_reset = reward(kInitialState, RobotAction::GiveChoices, spec);
  for (int round = cfg.max_rounds - 1; round >= 0; --round) {
    const bool last = round + 1 >= cfg.max_rounds;
    const auto future = [&](int t, int k, StateIndex s) {
      return last ? 0.0 : next[layer_index(t, k, s)];
    };
    for (int t = 1; t <= triggers; ++t) {
      for (int k = 0; k < streaks; ++k) {
        for (StateIndex s = 0; s < kNumStates; ++s) {
          const PwdState state = decode_state(s);
          double v = 0.0;
          if (k >= cfg.forced_choice_streak) {
            const ChoiceDistribution& dist = model.choice_for(state);
            const double r_keep = reward(state, RobotAction::GiveChoices, spec);
            v += dist[static_cast<int>(PwdChoice::Stop)] * r_keep;
            v += dist[static_cast<int>(PwdChoice::Continue)] * (r_keep + future(t, 0, s));
            const double change_future =
                t >= cfg.max_triggers ? 0.0 : future(t + 1, 0, encode_state(kInitialState));
            v += dist[static_cast<int>(PwdChoice::ChangeTrigger)] * (r_reset + change_future);
          } else {
            const RobotAction a = policy.action(s);
            const ProbabilityRow& row = model.row(a, state);
            for (StateIndex n = 0; n < kNumStates; ++n) {
              if (row[n] == 0.0) continue;
              const PwdState ns = decode_state(n);
              const int k_next = is_bad(ns) ? std::min(k + 1, cfg.forced_choice_streak) : 0;
              v += row[n] * (reward(ns, a, spec) + future(t, k_next, n));
            }
          }
          cur[layer_index(t, k, s)] = v;
        }
      }
    }
    std::swap(cur, next);
  }
  return next[layer_index(1, 0, encode_state(kInitialState))];
}

void EvalConfig::validate() const {
  if (probe_rollouts < 1 || selection_rollouts < 1 || oracle_rollouts < 1 || top_k < 1 ||
      trace_experiments < 0 || snapshot_window < 1) {
    throw std::invalid_argument("evaluation counts must be positive");
  }
}

std::vector<PolicyCount> count_policies(const std::vector<PolicyTable>& snapshots) {
  std::map<PolicyTable, int> counts;
  for (const auto& p : snapshots) ++counts[p];
  std::vector<PolicyCount> out;
  out.reserve(counts.size());
  for (const auto& [p, c] : counts) out.push_back({p, c});
  std::sort(out.begin(), out.end(), [](const PolicyCount& a, const PolicyCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.policy.hash() < b.policy.hash();
  });
  return out;
}

std::size_t select_final(const std::vector<CandidateResult>& candidates) {
  if (candidates.empty()) throw ReportError("no candidate policies");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.mean_return > b.mean_return ||
        (c.mean_return == b.mean_return && c.policy.hash() < b.policy.hash())) {
      best = i;
    }
  }
  return best;
}

OracleCheck check_against_exact(std::string label, const PolicyTable& policy,
                                const Environment& env, std::uint64_t seed, int n,
                                double tolerance_se) {
  OracleCheck check;
  check.label = std::move(label);
  check.policy = policy;
  const RolloutResult mc = rollout_policy(policy, env, seed, n);
  check.mc_mean = mc.mean_return;
  check.std_error = mc.std_error;
  check.n = mc.n;
  check.exact_value = exact_policy_value(policy, env);
  check.within_tolerance =
      std::abs(check.mc_mean - check.exact_value) <= tolerance_se * check.std_error + 1e-9;
  return check;
}

EvalReport build_report(const TrainLog& log, const Environment& env, std::uint64_t seed,
                        const EvalConfig& cfg) {
  cfg.validate();
  if (log.snapshots.size() < static_cast<std::size_t>(cfg.snapshot_window)) {
    throw ReportError("training log holds " + std::to_string(log.snapshots.size()) +
                      " policy snapshots, the report needs " +
                      std::to_string(cfg.snapshot_window));
  }
  if (log.probe_policies.size() != log.epochs.size()) {
    throw ReportError("training log has no probe policy for every epoch");
  }
  const int episodes_per_epoch =
      log.epochs.empty() ? 0 : static_cast<int>(log.episode_returns.size() / log.epochs.size());

  EvalReport report;
  for (std::size_t k = 0; k < log.epochs.size(); ++k) {
    const EpochRecord& rec = log.epochs[k];
    report.epsilon_greedy_curve.push_back(rec.average_return);
    report.q_sum_series.push_back(rec.q_sum);
    report.q_update_series.push_back(rec.q_update);
    report.greedy_curve.push_back(
        rollout_policy(log.probe_policies[k], env, derive_seed(seed, StreamPurpose::GreedyProbe, k),
                       cfg.probe_rollouts)
            .mean_return);
    report.random_curve.push_back(
        random_baseline(env, derive_seed(seed, StreamPurpose::RandomBaseline, k),
                        std::max(episodes_per_epoch, 1))
            .mean_return);
  }

  const std::vector<PolicyTable> window(log.snapshots.end() - cfg.snapshot_window,
                                        log.snapshots.end());
  report.policy_frequency = count_policies(window);

  // Candidates share one stream family so they face the same PwD draws.
  const std::uint64_t selection_seed = derive_seed(seed, StreamPurpose::PolicySelection);
  const std::size_t k = std::min<std::size_t>(cfg.top_k, report.policy_frequency.size());
  for (std::size_t i = 0; i < k; ++i) {
    const PolicyCount& pc = report.policy_frequency[i];
    const RolloutResult r = rollout_policy(pc.policy, env, selection_seed, cfg.selection_rollouts);
    report.candidates.push_back({pc.policy, pc.count, r.mean_return, r.std_error, r.n,
                                 exact_policy_value(pc.policy, env)});
  }
  report.final_result = report.candidates[select_final(report.candidates)];
  report.final_policy = report.final_result.policy;

  if (cfg.trace_experiments > 0) {
    report.traces = rollout_policy(report.final_policy, env,
                                   derive_seed(seed, StreamPurpose::FinalTraces),
                                   cfg.trace_experiments, true)
                        .traces;
  }

  report.oracle_checks.push_back(check_against_exact(
      "final_policy", report.final_policy, env, derive_seed(seed, StreamPurpose::OracleCheck),
      cfg.oracle_rollouts, cfg.oracle_tolerance_se));
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const CandidateResult& c = report.candidates[i];
    OracleCheck check;
    check.label = "candidate_" + std::to_string(i);
    check.policy = c.policy;
    check.mc_mean = c.mean_return;
    check.std_error = c.std_error;
    check.n = c.n;
    check.exact_value = c.exact_value;
    check.within_tolerance =
        std::abs(c.mean_return - c.exact_value) <= cfg.oracle_tolerance_se * c.std_error + 1e-9;
    report.oracle_checks.push_back(std::move(check));
  }
  return report;
}

}  // namespace reminisce

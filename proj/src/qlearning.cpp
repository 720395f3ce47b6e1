#include "reminisce/qlearning.hpp"

#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "reminisce/io_util.hpp"

namespace reminisce {

int QTable::learnable_column(RobotAction a) {
  if (!is_learnable(a)) throw std::out_of_range("GiveChoices has no Q-table column");
  return action_index(a);
}

double QTable::max_value(StateIndex s) const {
  const Row& r = row(s);
  double best = r[0];
  for (double v : r) best = std::max(best, v);
  return best;
}

RobotAction QTable::best_action(StateIndex s) const {
  const Row& r = row(s);
  int best = 0;
  for (int a = 1; a < kNumLearnableActions; ++a) {
    if (r[a] > r[best]) best = a;
  }
  return static_cast<RobotAction>(best);
}

double QTable::sum() const {
  double total = 0.0;
  for (const Row& r : values_) total = std::accumulate(r.begin(), r.end(), total);
  return total;
}

bool QTable::all_finite() const {
  for (const Row& r : values_) {
    for (double v : r) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void QTable::clear() {
  for (Row& r : values_) r.fill(0.0);
}

PolicyTable PolicyTable::uniform(RobotAction a) {
  PolicyTable p;
  for (StateIndex s = 0; s < kNumStates; ++s) p.set(s, a);
  return p;
}

void PolicyTable::set(StateIndex s, RobotAction a) {
  if (!is_learnable(a)) throw std::invalid_argument("policies select only a1..a6");
  actions_.at(s) = a;
}

std::string PolicyTable::code() const {
  std::string out;
  out.reserve(kNumStates);
  for (RobotAction a : actions_) out += static_cast<char>('0' + action_index(a));
  return out;
}

std::uint64_t PolicyTable::hash() const {
  return std::stoull(fnv1a_hex(code()), nullptr, 16);
}

PolicyTable greedy_policy(const QTable& q) {
  PolicyTable p;
  for (StateIndex s = 0; s < kNumStates; ++s) p.set(s, q.best_action(s));
  return p;
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  if (epochs < 1 || episodes_per_epoch < 1) {
    throw std::invalid_argument("epochs and episodes_per_epoch must be positive");
  }
  if (probe_episode < 1 || probe_episode > episodes_per_epoch) {
    throw std::invalid_argument("probe_episode must lie within an epoch");
  }
  if (snapshot_window < 0) throw std::invalid_argument("snapshot_window must be >= 0");
}

namespace {

bool is_delayed(RobotAction a, DelayedUpdateAction mode) {
  return mode == DelayedUpdateAction::GiveChoices ? a == RobotAction::GiveChoices
                                                  : a == RobotAction::Comfort;
}

void td_update(QTable& q, StateIndex s, RobotAction a, double r, const PwdState& s_next,
               const TrainConfig& cfg, bool terminal) {
  const double bootstrap = terminal ? 0.0 : cfg.gamma * q.max_value(encode_state(s_next));
  double& entry = q.at(s, a);
  entry += cfg.alpha * (r + bootstrap - entry);
}

}  // namespace

void update(QTable& q, const std::optional<PreviousStep>& previous, const PwdState& s_t,
            RobotAction a_t, double r_t, const PwdState& s_next, const TrainConfig& cfg,
            bool terminal) {
  if (is_delayed(a_t, cfg.delayed_update)) {
    if (previous && is_learnable(previous->action)) {
      td_update(q, encode_state(previous->state), previous->action, r_t, s_next, cfg, terminal);
      return;
    }
    if (a_t == RobotAction::GiveChoices) {
      throw std::logic_error("GiveChoices update needs a learnable previous step");
    }
  }
  // With the Comfort variant a GiveChoices step has nowhere to write.
  if (!is_learnable(a_t)) return;
  td_update(q, encode_state(s_t), a_t, r_t, s_next, cfg, terminal);
}

RobotAction select_action(const QTable& q, const PwdState& s, double epsilon, RandomStream& rng) {
  if (rng.uniform() < epsilon) {
    return static_cast<RobotAction>(rng.uniform_index(kNumLearnableActions));
  }
  return q.best_action(encode_state(s));
}

double train_episode(QTable& q, const Environment& env, const TrainConfig& cfg,
                     RandomStream& rng) {
  SessionState ss = env.reset();
  std::optional<PreviousStep> previous;
  double episode_return = 0.0;
  while (!ss.done) {
    const PwdState s_t = ss.current;
    const RobotAction a = env.forced_action_required(ss)
                              ? RobotAction::GiveChoices
                              : select_action(q, s_t, cfg.epsilon, rng);
    const StepOutcome out = env.step(ss, a, rng);
    episode_return += out.reward;
    update(q, previous, s_t, a, out.reward, out.next_state, cfg, out.done);
    previous = PreviousStep{s_t, a};
  }
  return episode_return;
}

TrainResult train(const TrainConfig& cfg, const TransitionModel& model, const RewardSpec& spec,
                  const EnvConfig& env_cfg) {
  cfg.validate();
  const Environment env(model, spec, env_cfg);
  RandomStream rng(derive_seed(cfg.seed, StreamPurpose::Training));

  const double bound_lo = std::min(0.0, min_reward(spec)) / (1.0 - cfg.gamma);
  const double bound_hi = std::max(0.0, max_reward(spec)) / (1.0 - cfg.gamma);

  TrainResult result;
  TrainLog& log = result.log;
  log.epochs.reserve(cfg.epochs);
  log.episode_returns.reserve(cfg.total_episodes());
  const long first_snapshot = cfg.total_episodes() - cfg.snapshot_window;
  long episode = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double return_sum = 0.0;
    double q_sum_total = 0.0;
    for (int e = 0; e < cfg.episodes_per_epoch; ++e, ++episode) {
      const double ret = train_episode(result.q, env, cfg, rng);
      log.episode_returns.push_back(ret);
      return_sum += ret;
      q_sum_total += result.q.sum();
      for (StateIndex s = 0; s < kNumStates; ++s) {
        for (double v : result.q.row(s)) {
          if (!(v >= bound_lo - 1e-9 && v <= bound_hi + 1e-9)) {
            throw std::logic_error("Q-value left its reward bounds");
          }
        }
      }
      if (e + 1 == cfg.probe_episode) log.probe_policies.push_back(greedy_policy(result.q));
      if (episode >= first_snapshot) log.snapshots.push_back(greedy_policy(result.q));
    }
    EpochRecord rec;
    rec.average_return = return_sum / cfg.episodes_per_epoch;
    rec.q_sum = q_sum_total / cfg.episodes_per_epoch;
    if (!log.epochs.empty()) {
      const double prev = log.epochs.back().q_sum;
      rec.q_update = std::abs(rec.q_sum - prev) / std::max(std::abs(prev), DBL_MIN);
    }
    log.epochs.push_back(rec);
  }
  return result;
}

}  // namespace reminisce

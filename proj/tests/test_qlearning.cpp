#include <array>
#include <cmath>

#include "doctest.h"
#include "reminisce/qlearning.hpp"
#include "support.hpp"

using namespace reminisce;
using test_support::st;

namespace {

bool same_except(const QTable& a, const QTable& b, StateIndex s, RobotAction act) {
  for (StateIndex i = 0; i < kNumStates; ++i)
    for (int k = 0; k < kNumLearnableActions; ++k) {
      if (i == s && k == action_index(act)) continue;
      if (a.row(i)[k] != b.row(i)[k]) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("QTable shape and tie-breaking") {
  QTable q;
  CHECK(q.row(0).size() == 6);
  CHECK(q.sum() == 0.0);
  CHECK(q.best_action(3) == RobotAction::EasyPrompt);
  CHECK_THROWS(q.at(0, RobotAction::GiveChoices));
  q.at(4, RobotAction::Explain) = 1.0;
  q.at(4, RobotAction::Comfort) = 1.0;
  CHECK(q.best_action(4) == RobotAction::Explain);
  CHECK(q.max_value(4) == 1.0);
}

TEST_CASE("select_action") {
  QTable q;
  RandomStream rng(5);
  CHECK(select_action(q, kInitialState, 0.0, rng) == RobotAction::EasyPrompt);
  q.row(encode_state(kInitialState)) = {0, 0, 0, 1, 0, 0};
  CHECK(select_action(q, kInitialState, 0.0, rng) == RobotAction::Repeat);

  constexpr int n = 60000;
  std::array<int, 6> counts{};
  for (int i = 0; i < n; ++i) {
    const RobotAction a = select_action(q, kInitialState, 1.0, rng);
    REQUIRE(is_learnable(a));
    ++counts[action_index(a)];
  }
  const double p = 1.0 / 6.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sigma);
}

TEST_CASE("ordinary update") {
  QTable q;
  const TrainConfig cfg;
  const PwdState s = st(1, 0, 0);
  update(q, std::nullopt, s, RobotAction::ModeratePrompt, 3.75, kInitialState, cfg, false);
  CHECK(q.at(encode_state(s), RobotAction::ModeratePrompt) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(q.sum() == doctest::Approx(0.1875).epsilon(1e-15));

  // Bootstrap from the next state's max.
  QTable q2;
  q2.at(encode_state(kInitialState), RobotAction::Explain) = 4.0;
  q2.at(encode_state(s), RobotAction::EasyPrompt) = 1.0;
  const QTable before = q2;
  update(q2, std::nullopt, s, RobotAction::EasyPrompt, -2.0, kInitialState, cfg, false);
  const double expected = 1.0 + 0.05 * (-2.0 + 0.95 * 4.0 - 1.0);
  CHECK(q2.at(encode_state(s), RobotAction::EasyPrompt) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(same_except(q2, before, encode_state(s), RobotAction::EasyPrompt));
}

TEST_CASE("GiveChoices update lands on the previous pair") {
  QTable q;
  const TrainConfig cfg;
  const PwdState prev = st(0, 1, 1);
  const PwdState bad = st(0, -1, 1);
  update(q, PreviousStep{prev, RobotAction::Repeat}, bad, RobotAction::GiveChoices, -7.5, bad, cfg,
         false);
  CHECK(q.at(encode_state(prev), RobotAction::Repeat) == doctest::Approx(-0.375).epsilon(1e-15));
  CHECK(same_except(q, QTable{}, encode_state(prev), RobotAction::Repeat));
  for (double v : q.row(encode_state(bad))) CHECK(v == 0.0);
  CHECK_THROWS_AS(update(q, std::nullopt, bad, RobotAction::GiveChoices, 0.0, bad, cfg, false),
                  std::logic_error);
}

TEST_CASE("terminal step drops the bootstrap") {
  QTable q;
  const TrainConfig cfg;
  const PwdState prev = st(2, 0, 1);
  const PwdState bad = st(2, -1, 1);
  q.at(encode_state(prev), RobotAction::DifficultPrompt) = 2.0;
  q.row(encode_state(bad)).fill(10.0);
  update(q, PreviousStep{prev, RobotAction::DifficultPrompt}, bad, RobotAction::GiveChoices, -3.75,
         bad, cfg, true);
  CHECK(q.at(encode_state(prev), RobotAction::DifficultPrompt) ==
        doctest::Approx(2.0 + 0.05 * (-3.75 - 2.0)).epsilon(1e-15));
}

TEST_CASE("Comfort delayed-update variant") {
  TrainConfig cfg;
  cfg.delayed_update = DelayedUpdateAction::Comfort;
  QTable q;
  const PwdState prev = st(0, 0, 0);
  const PwdState s = st(0, -1, 0);
  update(q, PreviousStep{prev, RobotAction::EasyPrompt}, s, RobotAction::Comfort, 2.0,
         kInitialState, cfg, false);
  CHECK(q.at(encode_state(prev), RobotAction::EasyPrompt) == doctest::Approx(0.1));
  CHECK(q.at(encode_state(s), RobotAction::Comfort) == 0.0);
  const QTable before = q;
  update(q, PreviousStep{prev, RobotAction::EasyPrompt}, s, RobotAction::GiveChoices, 2.0, s, cfg,
         false);
  CHECK(q == before);
}

TEST_CASE("zero learning rate leaves the table unchanged") {
  // validate() forbids alpha = 0 for training; update itself is still well defined.
  TrainConfig cfg;
  cfg.alpha = 0.0;
  QTable q;
  q.at(5, RobotAction::Explain) = 1.5;
  const QTable before = q;
  RandomStream rng(0);
  for (int i = 0; i < 100; ++i) {
    const PwdState s = decode_state(static_cast<int>(rng.uniform_index(18)));
    const PwdState n = decode_state(static_cast<int>(rng.uniform_index(18)));
    update(q, PreviousStep{n, RobotAction::Comfort}, s,
           action_from_index(static_cast<int>(rng.uniform_index(7))), 3.0, n, cfg, i % 2 == 0);
  }
  CHECK(q == before);
}

TEST_CASE("constant reward in a single state converges geometrically") {
  const TrainConfig cfg;
  QTable q;
  const PwdState s = st(2, 1, 0);
  const double r = 7.0;
  const double limit = r / (1 - cfg.gamma);
  const double contraction = 1 - cfg.alpha * (1 - cfg.gamma);
  RandomStream rng(0);
  for (int n = 1; n <= 10000; ++n) {
    const RobotAction a = select_action(q, s, 0.0, rng);
    update(q, PreviousStep{s, a}, s, a, r, s, cfg, false);
    if (n % 500 == 0) {
      const double closed_form = limit * (1 - std::pow(contraction, n));
      CHECK(q.at(encode_state(s), RobotAction::EasyPrompt) ==
            doctest::Approx(closed_form).epsilon(1e-10));
    }
  }
  CHECK(q.at(encode_state(s), RobotAction::EasyPrompt) == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("greedy policy") {
  QTable q;
  CHECK(greedy_policy(q) == PolicyTable::uniform(RobotAction::EasyPrompt));
  for (StateIndex s = 0; s < kNumStates; ++s) q.at(s, RobotAction::Comfort) = 1.0;
  CHECK(greedy_policy(q) == PolicyTable::uniform(RobotAction::Comfort));
  CHECK_THROWS_AS(PolicyTable::uniform(RobotAction::GiveChoices), std::invalid_argument);

  RandomStream rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    QTable r;
    for (StateIndex s = 0; s < kNumStates; ++s)
      for (double& v : r.row(s)) v = rng.uniform() * 20 - 10;
    const PolicyTable p = greedy_policy(r);
    const double scale = 0.01 + rng.uniform() * 100;
    const double shift = rng.uniform() * 50 - 25;
    QTable scaled = r;
    for (StateIndex s = 0; s < kNumStates; ++s)
      for (double& v : scaled.row(s)) v = scale * v + shift;
    CHECK(greedy_policy(scaled) == p);

    // Nudging a non-maximal entry toward, but not past, the max.
    QTable nudged = r;
    const StateIndex s = static_cast<int>(rng.uniform_index(18));
    const int best = action_index(p.action(s));
    const int other = (best + 1) % 6;
    double& v = nudged.row(s)[other];
    v += 0.5 * (nudged.row(s)[best] - v);
    CHECK(greedy_policy(nudged) == p);
  }
}

TEST_CASE("policy code and hash") {
  PolicyTable p;
  p.set(0, RobotAction::Comfort);
  CHECK(p.code() == "500000000000000000");
  CHECK(p.hash() != PolicyTable{}.hash());
  CHECK_THROWS_AS(p.set(1, RobotAction::GiveChoices), std::invalid_argument);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("training schedule and determinism") {
  const TransitionModel m = default_model(0);
  TrainConfig one;
  one.epochs = 1;
  one.episodes_per_epoch = 1;
  one.probe_episode = 1;
  one.snapshot_window = 1;
  const TrainResult r = train(one, m, RewardSpec::r1());
  CHECK(r.log.epochs.size() == 1);
  CHECK(r.log.epochs[0].q_update == 0.0);
  CHECK(r.log.episode_returns.size() == 1);
  CHECK(r.log.probe_policies.size() == 1);
  CHECK(r.log.snapshots.size() == 1);
  CHECK(r.log.epochs[0].q_sum == doctest::Approx(r.q.sum()));

  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.seed = 3;
  const TrainResult a = train(cfg, m, RewardSpec::r2());
  const TrainResult b = train(cfg, m, RewardSpec::r2());
  CHECK(a.q == b.q);
  CHECK(a.log.episode_returns == b.log.episode_returns);
  CHECK(a.log.snapshots.size() == 600);
  CHECK(a.log.probe_policies.size() == 40);
  CHECK(a.q.all_finite());
  cfg.seed = 4;
  CHECK_FALSE(train(cfg, m, RewardSpec::r2()).q == a.q);

  for (std::size_t k = 1; k < a.log.epochs.size(); ++k) {
    const double prev = a.log.epochs[k - 1].q_sum;
    CHECK(a.log.epochs[k].q_update ==
          doctest::Approx(std::abs(a.log.epochs[k].q_sum - prev) / std::abs(prev)));
  }
  for (int e = 0; e < cfg.epochs; ++e) {
    double sum = 0.0;
    for (int i = 0; i < cfg.episodes_per_epoch; ++i) sum += a.log.episode_returns[e * 30 + i];
    CHECK(a.log.epochs[e].average_return == doctest::Approx(sum / 30));
  }
}

TEST_CASE("Q-values stay within the reward bounds") {
  // Bounds for the presets: r_min / (1 - gamma) = -150, r_max / (1 - gamma) = 280.
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.epsilon = 0.5;
  for (RewardSpec spec : {RewardSpec::r1(), RewardSpec::r2()}) {
    const TrainResult r = train(cfg, default_model(1), spec);
    for (StateIndex s = 0; s < kNumStates; ++s)
      for (double v : r.q.row(s)) {
        CHECK(v >= -150.0);
        CHECK(v <= 280.0);
      }
  }
}

// Acceptance suite: trains the default configuration for five seeds under both
// reward presets and checks each criterion, one PASS/FAIL line per criterion.
// Lines tagged "info" are reported but do not affect the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "reminisce/evaluation.hpp"
#include "reminisce/experiment.hpp"
#include "reminisce/io_util.hpp"
#include "reminisce/qlearning.hpp"
#include "support.hpp"

using namespace reminisce;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 5;
constexpr int kTail = 300;

struct Run {
  std::uint64_t seed = 0;
  TrainResult train;
  EvalReport report;
};

struct Variant {
  RewardSpec spec;
  std::vector<Run> runs;
};

int failures = 0;

void verdict(const char* id, bool pass, const std::string& text) {
  std::printf("%s %s %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
  if (!pass) ++failures;
}

void info(const std::string& text) { std::printf("     info %s\n", text.c_str()); }

std::vector<double> tail(const std::vector<double>& xs, int n) {
  return {xs.end() - n, xs.end()};
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Trailing 100-epoch average ending at 1-based epoch `epoch`.
double moving_average(const std::vector<double>& xs, int epoch) {
  return mean({xs.begin() + (epoch - 100), xs.begin() + epoch});
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Variant run_variant(RewardSpec spec, const TransitionModel& model) {
  Variant v{spec, {}};
  const Environment env(model, spec);
  for (int s = 0; s < kSeeds; ++s) {
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.reward_variant = spec.variant;
    Run r;
    r.seed = cfg.seed;
    r.train = train(cfg, model, spec);
    r.report = build_report(r.train.log, env, cfg.seed);
    v.runs.push_back(std::move(r));
  }
  return v;
}

const char* name(const Variant& v) { return v.spec.variant == RewardVariant::R1 ? "R1" : "R2"; }

int count_aggressive(const PolicyTable& p) {
  int n = 0;
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const RobotAction a = p.action(s);
    n += a == RobotAction::ModeratePrompt || a == RobotAction::DifficultPrompt;
  }
  return n;
}

void criterion_1(const std::vector<Variant>& variants) {
  bool pass = true;
  std::string text = "epsilon-greedy beats random (Welch one-sided p<0.01, last 300 epochs):";
  for (const auto& v : variants) {
    int ok = 0;
    double worst = 0.0;
    for (const auto& r : v.runs) {
      const auto w = test_support::welch(tail(r.report.epsilon_greedy_curve, kTail),
                                         tail(r.report.random_curve, kTail));
      worst = std::max(worst, w.p_greater);
      ok += w.p_greater < 0.01;
    }
    pass = pass && ok == kSeeds;
    text += std::string(" ") + name(v) + " " + std::to_string(ok) + "/5 (max p " +
            fmt("%.2e", worst) + ")";
  }
  verdict("C1", pass, text);
}

int greedy_ge_exploratory(const Variant& v, std::string& detail) {
  int ok = 0;
  for (const auto& r : v.runs) {
    const double g = mean(tail(r.report.greedy_curve, kTail));
    const double e = mean(tail(r.report.epsilon_greedy_curve, kTail));
    ok += g >= e;
    detail += " " + fmt("%.2f", g) + "/" + fmt("%.2f", e);
  }
  return ok;
}

int return_converged(const Variant& v, std::string& detail) {
  int ok = 0;
  for (const auto& r : v.runs) {
    const auto& c = r.report.epsilon_greedy_curve;
    const double a = moving_average(c, 200);
    const double b = moving_average(c, 1500);
    const double rel = std::abs(b - a) / std::abs(a);
    ok += rel < 0.05;
    detail += " " + fmt("%.4f", rel);
  }
  return ok;
}

int q_converged(const Variant& v, std::string& detail) {
  int ok = 0;
  for (const auto& r : v.runs) {
    const auto& q = r.report.q_update_series;
    const double worst = *std::max_element(q.begin() + 800, q.end());
    ok += worst < 0.01;
    detail += " " + fmt("%.4f", worst);
  }
  return ok;
}

// Criteria 2-4 are judged on the R1 training curves; R2 figures are reported alongside.
template <typename F>
void curve_criterion(const char* id, const char* what, const std::vector<Variant>& variants, F f) {
  std::string d1;
  const int ok = f(variants[0], d1);
  verdict(id, ok >= 4, std::string(what) + " R1 " + std::to_string(ok) + "/5 [" + d1 + " ]");
  std::string d2;
  const int ok2 = f(variants[1], d2);
  info(std::string(id) + " R2 " + std::to_string(ok2) + "/5 [" + d2 + " ]");
}

void criterion_5(const std::vector<Variant>& variants) {
  const StateIndex neg = encode_state({ResponseRelevance::NR, EmotionLevel::Neg, ConfusionState::No});
  const StateIndex conf = encode_state({ResponseRelevance::NR, EmotionLevel::Pos, ConfusionState::Yes});
  bool pass = true;
  std::string text = "final policy: a6 at [NR, Neg, No] and a4/a5 at [NR, Pos, Yes]:";
  for (const auto& v : variants) {
    int ok = 0;
    std::string codes;
    for (const auto& r : v.runs) {
      const PolicyTable& p = r.report.final_policy;
      const bool comfort = p.action(neg) == RobotAction::Comfort;
      const bool clarify = p.action(conf) == RobotAction::Repeat || p.action(conf) == RobotAction::Explain;
      ok += comfort && clarify;
      codes += " " + std::string(action_name(p.action(neg))) + "/" + std::string(action_name(p.action(conf)));
    }
    pass = pass && ok >= 3;
    text += std::string(" ") + name(v) + " " + std::to_string(ok) + "/5 [" + codes + " ]";
  }
  verdict("C5", pass, text);
}

void criterion_6(const std::vector<Variant>& variants) {
  int aggressive[2] = {0, 0};
  for (int i = 0; i < 2; ++i)
    for (const auto& r : variants[i].runs) aggressive[i] += count_aggressive(r.report.final_policy);
  const StateIndex rr = encode_state({ResponseRelevance::RR, EmotionLevel::Neu, ConfusionState::No});
  int r2_push = 0;
  for (const auto& r : variants[1].runs) {
    const RobotAction a = r.report.final_policy.action(rr);
    r2_push += a == RobotAction::ModeratePrompt || a == RobotAction::DifficultPrompt;
  }
  verdict("C6", aggressive[1] >= aggressive[0] && r2_push >= 3,
          "a2/a3 states over 5 seeds R2 " + std::to_string(aggressive[1]) + " vs R1 " +
              std::to_string(aggressive[0]) + "; R2 a2/a3 at [RR, Neu, No] in " +
              std::to_string(r2_push) + "/5 seeds");
}

void criterion_7(const std::vector<Variant>& variants, const TransitionModel& model) {
  const Environment env(model, RewardSpec::r1());
  const std::vector<std::pair<std::string, PolicyTable>> policies = {
      {"final", variants[0].runs[0].report.final_policy},
      {"all-a1", PolicyTable::uniform(RobotAction::EasyPrompt)},
      {"all-a3", PolicyTable::uniform(RobotAction::DifficultPrompt)}};
  int ok = 0;
  std::string detail;
  std::uint64_t k = 0;
  for (const auto& [label, p] : policies) {
    const OracleCheck c = check_against_exact(
        label, p, env, derive_seed(2024, StreamPurpose::OracleCheck, k++), 100000, 4.0);
    ok += c.within_tolerance;
    detail += " " + label + " " + fmt("%.3f", c.mc_mean) + " vs " + fmt("%.3f", c.exact_value) +
              " (" + fmt("%.2f", std::abs(c.mc_mean - c.exact_value) / c.std_error) + " se)";
  }
  verdict("C7", ok == 3, "Monte-Carlo n=1e5 within 4 se of exact value " + std::to_string(ok) +
                             "/3:" + detail);
}

void criterion_8() {
  int valid = 0;
  double worst_row = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TransitionModel m = default_model(seed);
    valid += validate_model(m).ok();
    for (const auto& mat : m.matrices)
      for (const auto& row : mat) {
        worst_row = std::max(worst_row, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
      }
  }
  verdict("C8", valid == 100 && worst_row <= 1e-6,
          "default_model(0..99) with zero violations " + std::to_string(valid) +
              "/100; max |row sum - 1| " + fmt("%.1e", worst_row));
}

void criterion_9() {
  // a1 confuses, a4 raises the response while confusion stays, a7 Continue keeps the state.
  const PwdState s1{ResponseRelevance::NR, EmotionLevel::Pos, ConfusionState::Yes};
  const PwdState s2{ResponseRelevance::RR, EmotionLevel::Pos, ConfusionState::Yes};
  const TransitionModel m = test_support::deterministic_model(
      [&](const PwdState& s, RobotAction) { return s == kInitialState ? s1 : s2; }, {0, 1, 0});
  const Environment env(m, RewardSpec::r1());
  const TrainConfig cfg;
  QTable q;
  RandomStream fill(31);
  for (StateIndex s = 0; s < kNumStates; ++s)
    for (double& v : q.row(s)) v = fill.uniform() * 4 - 2;

  RandomStream rng(0);
  SessionState ss = env.reset();
  std::optional<PreviousStep> prev;
  const RobotAction plan[] = {RobotAction::EasyPrompt, RobotAction::Repeat, RobotAction::GiveChoices};
  QTable before_last;
  double r_last = 0.0;
  for (int t = 0; t < 3; ++t) {
    const PwdState s_t = ss.current;
    if (t == 2) before_last = q;
    const StepOutcome out = env.step(ss, plan[t], rng);
    update(q, prev, s_t, plan[t], out.reward, out.next_state, cfg, out.done);
    prev = PreviousStep{s_t, plan[t]};
    r_last = out.reward;
  }
  const bool forced_step = ss.current == s2 && ss.bad_streak == 0;
  const StateIndex target = encode_state(s1);
  const double old = before_last.at(target, RobotAction::Repeat);
  const double expected = old + cfg.alpha * (r_last + cfg.gamma * before_last.max_value(encode_state(s2)) - old);
  int changed = 0;
  bool only_target = true;
  for (StateIndex s = 0; s < kNumStates; ++s)
    for (int a = 0; a < kNumLearnableActions; ++a) {
      if (q.row(s)[a] != before_last.row(s)[a]) {
        ++changed;
        only_target = only_target && s == target && a == action_index(RobotAction::Repeat);
      }
    }
  const bool exact = q.at(target, RobotAction::Repeat) == expected;
  verdict("C9", forced_step && changed == 1 && only_target && exact,
          "a7 step changed " + std::to_string(changed) + " entry, Q([NR, Pos, Yes], a4) = " +
              format_double(q.at(target, RobotAction::Repeat)) + " expected " + format_double(expected));
}

void criterion_10() {
  const fs::path root = fs::temp_directory_path() / "reminisce_acceptance_determinism";
  fs::remove_all(root);
  std::string contents[2][3];
  const char* files[] = {"qtable.json", "trainlog.csv", "traces.csv"};
  for (int i = 0; i < 2; ++i) {
    ExperimentConfig cfg;
    cfg.seeds = {3};
    cfg.output_dir = root / ("run_" + std::to_string(i));
    cmd_train(cfg);
    cmd_evaluate(cfg.output_dir, {});
    for (int f = 0; f < 3; ++f) contents[i][f] = read_text_file(seed_dir(cfg.output_dir, 3) / files[f]);
  }
  bool same = true;
  std::string detail;
  for (int f = 0; f < 3; ++f) {
    same = same && contents[0][f] == contents[1][f] && !contents[0][f].empty();
    detail += std::string(" ") + files[f] + " " + fnv1a_hex(contents[0][f]);
  }
  fs::remove_all(root);
  verdict("C10", same, "two independent runs byte-identical:" + detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const TransitionModel model = default_model(0);
  {
    const auto a = std::chrono::steady_clock::now();
    TrainConfig cfg;
    train(cfg, model, RewardSpec::r1());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - a).count();
    info("one 1500x30 training run took " + fmt("%.2f", secs) + " s");
  }
  std::vector<Variant> variants;
  variants.push_back(run_variant(RewardSpec::r1(), model));
  variants.push_back(run_variant(RewardSpec::r2(), model));

  criterion_1(variants);
  curve_criterion("C2", "greedy >= epsilon-greedy mean over last 300 epochs:", variants,
                  greedy_ge_exploratory);
  curve_criterion("C3", "100-epoch average moves < 5% between epochs 200 and 1500:", variants,
                  return_converged);
  curve_criterion("C4", "q_update < 1% after epoch 800:", variants, q_converged);
  criterion_5(variants);
  criterion_6(variants);
  criterion_7(variants, model);
  criterion_8();
  criterion_9();
  criterion_10();

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  info("suite took " + fmt("%.1f", secs) + " s");
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

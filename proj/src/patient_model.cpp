#include "reminisce/patient_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "reminisce/io_util.hpp"

namespace reminisce {

namespace {

constexpr std::array<RobotAction, 3> kPrompts{RobotAction::EasyPrompt, RobotAction::ModeratePrompt,
                                              RobotAction::DifficultPrompt};
// Slack for floating-point noise in the monotonicity checks.
constexpr double kOrderSlack = 1e-12;

std::string describe_row(RobotAction a, StateIndex s) {
  return std::string(action_name(a)) + " row " + std::to_string(s) + " " +
         state_label(decode_state(s));
}

}  // namespace

std::vector<std::string> structural_errors(const TransitionModel& m) {
  std::vector<std::string> errors;
  for (int a = 0; a < kNumLearnableActions; ++a) {
    for (StateIndex s = 0; s < kNumStates; ++s) {
      const auto& row = m.matrices[a][s];
      double sum = 0.0;
      bool in_range = true;
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) in_range = false;
        sum += p;
      }
      if (!in_range) {
        errors.push_back(describe_row(static_cast<RobotAction>(a), s) +
                         ": entry outside [0, 1]");
      }
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        errors.push_back(describe_row(static_cast<RobotAction>(a), s) + ": row sums to " +
                         format_double(sum));
      }
    }
  }
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const auto& dist = m.choice[s];
    double sum = 0.0;
    bool in_range = true;
    for (double p : dist) {
      if (!(p >= 0.0 && p <= 1.0)) in_range = false;
      sum += p;
    }
    if (!in_range || !(std::abs(sum - 1.0) <= kStochasticTolerance)) {
      errors.push_back("choice distribution for state " + std::to_string(s) + " sums to " +
                       format_double(sum));
    }
    if (!m.choice_state_conditioned) break;
  }
  return errors;
}

std::size_t ModelConstraintReport::violations() const {
  return static_cast<std::size_t>(std::count_if(constraints.begin(), constraints.end(),
                                                [](const auto& c) { return !c.satisfied; }));
}

namespace {

// Next-state marginals computed directly from the matrix entries.
struct Marginals {
  std::array<double, kNumResponses> response{};
  std::array<double, kNumEmotions> emotion{};
  std::array<double, kNumConfusions> confusion{};

  double rr() const { return response[static_cast<int>(ResponseRelevance::RR)]; }
  double responding() const { return response[1] + response[2]; }
  double neg() const { return emotion[0]; }
  double pos() const { return emotion[2]; }
  double confused() const { return confusion[1]; }
};

Marginals marginals(const TransitionModel& m, RobotAction a, StateIndex s) {
  Marginals out;
  const auto& row = m.matrices[action_index(a)][s];
  for (StateIndex next = 0; next < kNumStates; ++next) {
    const PwdState ns = decode_state(next);
    out.response[static_cast<int>(ns.response)] += row[next];
    out.emotion[static_cast<int>(ns.emotion) + 1] += row[next];
    out.confusion[static_cast<int>(ns.confusion)] += row[next];
  }
  return out;
}

std::string fmt3(const char* what, double x, double y, double z) {
  std::ostringstream ss;
  ss << what << " a1=" << x << " a2=" << y << " a3=" << z;
  return ss.str();
}

std::string fmt2(const char* what, const char* lhs, double x, const char* rhs, double y) {
  std::ostringstream ss;
  ss << what << " " << lhs << "=" << x << " " << rhs << "=" << y;
  return ss.str();
}

void check_difficulty(const TransitionModel& m, ModelConstraintReport& report) {
  const std::vector<RobotAction> prompts(kPrompts.begin(), kPrompts.end());
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const Marginals e = marginals(m, RobotAction::EasyPrompt, s);
    const Marginals md = marginals(m, RobotAction::ModeratePrompt, s);
    const Marginals d = marginals(m, RobotAction::DifficultPrompt, s);
    report.constraints.push_back(
        {"C1-response", prompts, {s},
         e.rr() + kOrderSlack >= md.rr() && md.rr() + kOrderSlack >= d.rr(),
         fmt3("P(RR)", e.rr(), md.rr(), d.rr())});
    report.constraints.push_back(
        {"C1-emotion", prompts, {s},
         e.pos() + kOrderSlack >= md.pos() && md.pos() + kOrderSlack >= d.pos(),
         fmt3("P(Pos)", e.pos(), md.pos(), d.pos())});
    report.constraints.push_back(
        {"C1-confusion", prompts, {s},
         e.confused() <= md.confused() + kOrderSlack && md.confused() <= d.confused() + kOrderSlack,
         fmt3("P(Yes)", e.confused(), md.confused(), d.confused())});
  }
}

void check_bad_moment_penalty(const TransitionModel& m, ModelConstraintReport& report) {
  for (RobotAction a : kPrompts) {
    for (StateIndex bad = 0; bad < kNumStates; ++bad) {
      const PwdState sb = decode_state(bad);
      if (!is_bad(sb)) continue;
      for (StateIndex good = 0; good < kNumStates; ++good) {
        const PwdState sg = decode_state(good);
        if (is_bad(sg) || sg.response != sb.response) continue;
        const double pb = marginals(m, a, bad).rr();
        const double pg = marginals(m, a, good).rr();
        report.constraints.push_back({"C2", {a}, {bad, good}, pb <= pg + kOrderSlack,
                                      fmt2("P(RR)", "bad", pb, "good", pg)});
      }
    }
  }
}

void check_repair(const TransitionModel& m, ModelConstraintReport& report) {
  for (StateIndex s = 0; s < kNumStates; ++s) {
    if (decode_state(s).confusion != ConfusionState::Yes) continue;
    const Marginals hard = marginals(m, RobotAction::DifficultPrompt, s);
    for (RobotAction a : {RobotAction::Repeat, RobotAction::Explain}) {
      const Marginals rep = marginals(m, a, s);
      report.constraints.push_back(
          {"C3-response", {a, RobotAction::DifficultPrompt}, {s},
           rep.responding() + kOrderSlack >= hard.responding(),
           fmt2("P(IR or RR)", action_name(a).data(), rep.responding(), "a3", hard.responding())});
      report.constraints.push_back({"C3-emotion", {a, RobotAction::DifficultPrompt}, {s},
                                    rep.neg() <= hard.neg() + kOrderSlack,
                                    fmt2("P(Neg)", action_name(a).data(), rep.neg(), "a3",
                                         hard.neg())});
    }
  }
}

void check_comfort(const TransitionModel& m, ModelConstraintReport& report) {
  for (StateIndex s = 0; s < kNumStates; ++s) {
    if (decode_state(s).emotion != EmotionLevel::Neg) continue;
    const Marginals hard = marginals(m, RobotAction::DifficultPrompt, s);
    const Marginals comfort = marginals(m, RobotAction::Comfort, s);
    const std::vector<RobotAction> pair{RobotAction::Comfort, RobotAction::DifficultPrompt};
    report.constraints.push_back({"C4-response", pair, {s},
                                  comfort.rr() + kOrderSlack >= hard.rr(),
                                  fmt2("P(RR)", "a6", comfort.rr(), "a3", hard.rr())});
    report.constraints.push_back({"C4-emotion", pair, {s}, comfort.neg() <= hard.neg() + kOrderSlack,
                                  fmt2("P(Neg)", "a6", comfort.neg(), "a3", hard.neg())});
  }
}

}  // namespace

ModelConstraintReport validate_model(const TransitionModel& m) {
  ModelConstraintReport report;
  report.structural = structural_errors(m);
  if (!report.structurally_valid()) return report;
  check_difficulty(m, report);
  check_bad_moment_penalty(m, report);
  check_repair(m, report);
  check_comfort(m, report);
  return report;
}

// ---------------------------------------------------------------------------
// Default generator
//
// Each next-state row is the product of three independent marginals
// (response, emotion, confusion), each built from a baseline profile that
// depends on the current state, then scaled per action. Orderings required by
// the behaviour rules hold for the baseline and are restored after jitter by
// sorting, so every seed yields a valid model.

namespace {

using Triple = std::array<double, 3>;

struct Profile {
  Triple rr_base;                 // a1, a2, a3; descending
  Triple rr_momentum;             // by current response NR, IR, RR
  Triple prompt_ir_share;         // share of non-RR mass that is IR
  double neg_rr_factor;
  double confused_rr_factor;
  double pos_rr_bonus;
  std::array<Triple, 3> emotion;  // by current emotion: P(Neg, Neu, Pos)
  double confused_neg_boost;
  Triple confuse_from_clear;      // a1, a2, a3; ascending
  Triple confuse_from_confused;   // a1, a2, a3; ascending
  double neg_confuse_boost;
  double comfort_keep_confused;
  double clear_prob;
};

Profile baseline_profile(const DefaultModelParams& params) {
  Profile p;
  p.rr_base = {0.60, 0.45, 0.30};
  p.rr_momentum = {-0.05, 0.0, 0.10};
  p.prompt_ir_share = {0.35, 0.50, 0.65};
  p.neg_rr_factor = 0.5;
  p.confused_rr_factor = 0.6;
  p.pos_rr_bonus = 1.1;
  p.emotion = {Triple{0.55, 0.33, 0.12}, Triple{0.07, 0.60, 0.33}, Triple{0.04, 0.31, 0.65}};
  p.confused_neg_boost = 1.2;
  p.confuse_from_clear = {0.04, 0.08, 0.14};
  p.confuse_from_confused = {0.65, 0.75, 0.85};
  p.neg_confuse_boost = 1.5;
  p.comfort_keep_confused = 0.65;
  p.clear_prob = params.confusion_clear_prob;
  return p;
}

void perturb(Profile& p, double jitter, RandomStream& rng) {
  const auto bump = [&](double& v) { v *= 1.0 + jitter * (2.0 * rng.uniform() - 1.0); };
  for (double& v : p.rr_base) bump(v);
  std::sort(p.rr_base.begin(), p.rr_base.end(), std::greater<>());
  for (auto& row : p.emotion) {
    for (double& v : row) bump(v);
    const double sum = row[0] + row[1] + row[2];
    for (double& v : row) v /= sum;
  }
  for (double& v : p.confuse_from_clear) bump(v);
  std::sort(p.confuse_from_clear.begin(), p.confuse_from_clear.end());
  for (double& v : p.confuse_from_confused) bump(v);
  std::sort(p.confuse_from_confused.begin(), p.confuse_from_confused.end());
  bump(p.neg_rr_factor);
  bump(p.confused_rr_factor);
}

double clamp_prob(double v) { return std::clamp(v, 0.01, 0.95); }

// (NR, IR, RR) with the given RR mass and IR share of the remainder.
Triple response_dist(double rr, double ir_share) {
  const double ir = (1.0 - rr) * ir_share;
  return {1.0 - rr - ir, ir, rr};
}

double prompt_rr(const Profile& p, int prompt, const PwdState& s) {
  double rr = p.rr_base[prompt] + p.rr_momentum[static_cast<int>(s.response)];
  if (s.emotion == EmotionLevel::Neg) rr *= p.neg_rr_factor;
  if (s.emotion == EmotionLevel::Pos) rr *= p.pos_rr_bonus;
  if (s.confusion == ConfusionState::Yes) rr *= p.confused_rr_factor;
  return clamp_prob(rr);
}

Triple response_marginal(const Profile& p, RobotAction a, const PwdState& s) {
  const bool confused = s.confusion == ConfusionState::Yes;
  PwdState unconfused = s;
  unconfused.confusion = ConfusionState::No;
  switch (a) {
    case RobotAction::EasyPrompt:
    case RobotAction::ModeratePrompt:
    case RobotAction::DifficultPrompt: {
      const int k = action_index(a);
      return response_dist(prompt_rr(p, k, s), p.prompt_ir_share[k]);
    }
    case RobotAction::Repeat:
    case RobotAction::Explain: {
      const double scale = a == RobotAction::Repeat ? 0.8 : 0.9;
      if (!confused) return response_dist(clamp_prob(prompt_rr(p, 0, s) * (scale + 0.05)), 0.4);
      // Clarifying the prompt answers as if unconfused, never worse than a3.
      Triple dist = response_dist(clamp_prob(prompt_rr(p, 0, unconfused) * scale), 0.45);
      const Triple hard = response_marginal(p, RobotAction::DifficultPrompt, s);
      if (dist[0] > hard[0]) {
        dist[1] += dist[0] - hard[0];
        dist[0] = hard[0];
      }
      return dist;
    }
    case RobotAction::Comfort: {
      if (s.emotion != EmotionLevel::Neg) {
        return response_dist(clamp_prob(prompt_rr(p, 0, s) * 0.75), 0.35);
      }
      PwdState calmer = s;
      calmer.emotion = EmotionLevel::Neu;
      const double hard_rr = response_marginal(p, RobotAction::DifficultPrompt, s)[2];
      return response_dist(std::max(clamp_prob(prompt_rr(p, 0, calmer) * 0.9), hard_rr), 0.35);
    }
    case RobotAction::GiveChoices: break;
  }
  throw std::logic_error("no transition profile for a7");
}

// (neg, pos) weights applied before renormalizing the emotion row.
std::pair<double, double> emotion_shift(RobotAction a, const PwdState& s) {
  const bool confused = s.confusion == ConfusionState::Yes;
  switch (a) {
    case RobotAction::EasyPrompt: return {1.0, 1.0};
    case RobotAction::ModeratePrompt: return {1.2, 0.85};
    case RobotAction::DifficultPrompt: return {1.6, 0.65};
    case RobotAction::Repeat: return confused ? std::pair{1.0, 0.95} : std::pair{1.2, 0.9};
    case RobotAction::Explain: return confused ? std::pair{0.9, 1.0} : std::pair{1.2, 0.9};
    case RobotAction::Comfort:
      return s.emotion == EmotionLevel::Neg ? std::pair{0.2, 1.6} : std::pair{1.0, 1.0};
    case RobotAction::GiveChoices: break;
  }
  throw std::logic_error("no transition profile for a7");
}

Triple emotion_marginal(const Profile& p, RobotAction a, const PwdState& s) {
  Triple w = p.emotion[static_cast<int>(s.emotion) + 1];
  if (s.confusion == ConfusionState::Yes) w[0] *= p.confused_neg_boost;
  const auto [neg, pos] = emotion_shift(a, s);
  w[0] *= neg;
  w[2] *= pos;
  const double sum = w[0] + w[1] + w[2];
  return {w[0] / sum, w[1] / sum, w[2] / sum};
}

double confusion_marginal(const Profile& p, RobotAction a, const PwdState& s) {
  const bool confused = s.confusion == ConfusionState::Yes;
  double yes = 0.0;
  switch (a) {
    case RobotAction::EasyPrompt:
    case RobotAction::ModeratePrompt:
    case RobotAction::DifficultPrompt: {
      const int k = action_index(a);
      yes = confused ? p.confuse_from_confused[k] : p.confuse_from_clear[k];
      break;
    }
    case RobotAction::Repeat:
    case RobotAction::Explain:
      yes = confused ? 1.0 - p.clear_prob : p.confuse_from_clear[0];
      break;
    case RobotAction::Comfort:
      yes = confused ? p.comfort_keep_confused : p.confuse_from_clear[0];
      break;
    case RobotAction::GiveChoices: throw std::logic_error("no transition profile for a7");
  }
  if (s.emotion == EmotionLevel::Neg) yes *= p.neg_confuse_boost;
  return clamp_prob(yes);
}

}  // namespace

TransitionModel default_model(std::uint64_t seed, const DefaultModelParams& params) {
  Profile profile = baseline_profile(params);
  RandomStream rng(derive_seed(seed, StreamPurpose::ModelGeneration));
  perturb(profile, params.jitter, rng);

  TransitionModel m;
  for (int a = 0; a < kNumLearnableActions; ++a) {
    const auto action = static_cast<RobotAction>(a);
    for (StateIndex s = 0; s < kNumStates; ++s) {
      const PwdState cur = decode_state(s);
      const Triple resp = response_marginal(profile, action, cur);
      const Triple emo = emotion_marginal(profile, action, cur);
      const double yes = confusion_marginal(profile, action, cur);
      auto& row = m.matrices[a][s];
      double sum = 0.0;
      for (StateIndex n = 0; n < kNumStates; ++n) {
        const PwdState ns = decode_state(n);
        const double pc = ns.confusion == ConfusionState::Yes ? yes : 1.0 - yes;
        row[n] = resp[static_cast<int>(ns.response)] * emo[static_cast<int>(ns.emotion) + 1] * pc;
        sum += row[n];
      }
      for (double& v : row) v /= sum;
    }
  }
  m.choice.fill(params.choice);
  m.choice_state_conditioned = false;
  m.label = "default(seed=" + std::to_string(seed) + ")";
  m.provenance =
      "artifact default generator; qualitative profile, not measured patient data";
  return m;
}

PwdState sample_transition(const TransitionModel& m, const PwdState& s, RobotAction a,
                           RandomStream& rng) {
  if (!is_learnable(a)) {
    throw std::invalid_argument("sample_transition does not handle GiveChoices");
  }
  const auto& row = m.row(a, s);
  const double u = rng.uniform();
  double cumulative = 0.0;
  StateIndex last_positive = 0;
  for (StateIndex n = 0; n < kNumStates; ++n) {
    if (row[n] <= 0.0) continue;
    last_positive = n;
    cumulative += row[n];
    if (u < cumulative) return decode_state(n);
  }
  return decode_state(last_positive);
}

PwdChoice sample_choice(const TransitionModel& m, const PwdState& s, RandomStream& rng) {
  const auto& dist = m.choice_for(s);
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (int c = 0; c < kNumChoices; ++c) {
    if (dist[c] <= 0.0) continue;
    last_positive = c;
    cumulative += dist[c];
    if (u < cumulative) return static_cast<PwdChoice>(c);
  }
  return static_cast<PwdChoice>(last_positive);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json choice_json(const ChoiceDistribution& d) {
  return {{"stop", d[0]}, {"continue", d[1]}, {"change", d[2]}};
}

ChoiceDistribution parse_choice_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("choice distribution must be an object");
  ChoiceDistribution d{};
  for (const char* key : {"stop", "continue", "change"}) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw ModelError(std::string("choice distribution missing numeric '") + key + "'");
    }
  }
  d[0] = j.at("stop").get<double>();
  d[1] = j.at("continue").get<double>();
  d[2] = j.at("change").get<double>();
  return d;
}

}  // namespace

nlohmann::json model_to_json(const TransitionModel& m) {
  nlohmann::json actions = nlohmann::json::object();
  for (int a = 0; a < kNumLearnableActions; ++a) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : m.matrices[a]) rows.push_back(row);
    actions[std::string(action_name(static_cast<RobotAction>(a)))] = std::move(rows);
  }
  nlohmann::json choice;
  if (m.choice_state_conditioned) {
    choice = nlohmann::json::array();
    for (const auto& d : m.choice) choice.push_back(choice_json(d));
  } else {
    choice = choice_json(m.choice[0]);
  }
  return {{"actions", std::move(actions)},
          {"choice", std::move(choice)},
          {"metadata", {{"label", m.label}, {"provenance", m.provenance}}}};
}

TransitionModel model_from_json(const nlohmann::json& j, bool check_structure) {
  if (!j.is_object() || !j.contains("actions") || !j.contains("choice")) {
    throw ModelError("model file needs 'actions' and 'choice'");
  }
  TransitionModel m;
  const auto& actions = j.at("actions");
  for (int a = 0; a < kNumLearnableActions; ++a) {
    const std::string name(action_name(static_cast<RobotAction>(a)));
    if (!actions.contains(name)) throw ModelError("missing matrix for " + name);
    const auto& rows = actions.at(name);
    if (!rows.is_array() || rows.size() != kNumStates) {
      throw ModelError("matrix " + name + " must have 18 rows");
    }
    for (StateIndex s = 0; s < kNumStates; ++s) {
      const auto& row = rows.at(s);
      if (!row.is_array() || row.size() != kNumStates) {
        throw ModelError("matrix " + name + " row " + std::to_string(s) + " must have 18 entries");
      }
      for (StateIndex n = 0; n < kNumStates; ++n) {
        if (!row.at(n).is_number()) throw ModelError("non-numeric entry in " + name);
        m.matrices[a][s][n] = row.at(n).get<double>();
      }
    }
  }
  const auto& choice = j.at("choice");
  if (choice.is_array()) {
    if (choice.size() != kNumStates) throw ModelError("state-conditioned choice needs 18 entries");
    for (StateIndex s = 0; s < kNumStates; ++s) m.choice[s] = parse_choice_json(choice.at(s));
    m.choice_state_conditioned = true;
  } else {
    m.choice.fill(parse_choice_json(choice));
  }
  if (j.contains("metadata")) {
    const auto& meta = j.at("metadata");
    m.label = meta.value("label", "");
    m.provenance = meta.value("provenance", "");
  }
  if (!check_structure) return m;
  const auto errors = structural_errors(m);
  if (!errors.empty()) {
    std::string msg = "invalid transition model:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ModelError(msg);
  }
  return m;
}

TransitionModel load_model(const std::filesystem::path& path, bool check_structure) {
  try {
    return model_from_json(read_json_file(path), check_structure);
  } catch (const IoError& e) {
    throw ModelError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

void save_model(const TransitionModel& m, const std::filesystem::path& path) {
  write_text_file(path, dump_json(model_to_json(m)));
}

}  // namespace reminisce

#include "reminisce/serialization.hpp"

#include <sstream>
#include <stdexcept>

#include "reminisce/io_util.hpp"

namespace reminisce {

nlohmann::ordered_json qtable_to_json(const QTable& q) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (StateIndex s = 0; s < kNumStates; ++s) rows.push_back(q.row(s));
  return {{"q", std::move(rows)}, {"ordering", "response-major"}};
}

QTable qtable_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("ordering", "") != "response-major" || !j.contains("q")) {
    throw std::invalid_argument("Q-table JSON needs 'q' and ordering 'response-major'");
  }
  const auto& rows = j.at("q");
  if (!rows.is_array() || rows.size() != kNumStates) {
    throw std::invalid_argument("Q-table needs 18 rows");
  }
  QTable q;
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const auto& row = rows.at(s);
    if (!row.is_array() || row.size() != kNumLearnableActions) {
      throw std::invalid_argument("Q-table rows need 6 entries");
    }
    for (int a = 0; a < kNumLearnableActions; ++a) q.row(s)[a] = row.at(a).get<double>();
  }
  return q;
}

nlohmann::ordered_json policy_to_json(const PolicyTable& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (StateIndex s = 0; s < kNumStates; ++s) {
    j[state_triple(decode_state(s))] = std::string(action_name(p.action(s)));
  }
  return j;
}

PolicyTable policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("policy JSON must be an object");
  PolicyTable p;
  for (StateIndex s = 0; s < kNumStates; ++s) {
    const std::string key = state_triple(decode_state(s));
    if (!j.contains(key)) throw std::invalid_argument("policy missing state " + key);
    const auto a = parse_action_name(j.at(key).get<std::string>());
    if (!a || !is_learnable(*a)) {
      throw std::invalid_argument("policy action for " + key + " must be a1..a6");
    }
    p.set(s, *a);
  }
  return p;
}

std::string trainlog_csv(const TrainLog& log) {
  std::string out = "epoch,avg_return,q_sum,q_update\n";
  for (std::size_t k = 0; k < log.epochs.size(); ++k) {
    const EpochRecord& r = log.epochs[k];
    out += std::to_string(k) + "," + format_double(r.average_return) + "," +
           format_double(r.q_sum) + "," + format_double(r.q_update) + "\n";
  }
  return out;
}

std::string curves_csv(const EvalReport& report) {
  std::string out = "epoch,epsilon_greedy_ql,greedy_ql,random_action,q_sum,q_update\n";
  for (std::size_t k = 0; k < report.epsilon_greedy_curve.size(); ++k) {
    out += std::to_string(k) + "," + format_double(report.epsilon_greedy_curve[k]) + "," +
           format_double(report.greedy_curve[k]) + "," + format_double(report.random_curve[k]) +
           "," + format_double(report.q_sum_series[k]) + "," +
           format_double(report.q_update_series[k]) + "\n";
  }
  return out;
}

std::string traces_csv(const std::vector<EpisodeTrace>& traces) {
  std::string out = "step,state,action,choice\n";
  for (const EpisodeTrace& t : traces) {
    for (const TraceRow& row : t.rows) {
      out += std::to_string(row.step) + "," + csv_field(state_triple(row.state)) + "," +
             std::to_string(action_index(row.action)) + "," +
             (row.choice ? std::string(to_string(*row.choice)) : std::string()) + "\n";
    }
  }
  return out;
}

std::string trace_summary_csv(const std::vector<EpisodeTrace>& traces) {
  std::string out = "experiment,steps,return,done_reason\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(traces[i].rows.size()) + "," +
           format_double(traces[i].total_return) + "," +
           std::string(to_string(traces[i].done_reason)) + "\n";
  }
  return out;
}

namespace {
std::string hash_hex(const PolicyTable& p) { return fnv1a_hex(p.code()); }
}  // namespace

nlohmann::ordered_json policy_frequency_json(const std::vector<PolicyCount>& freq) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const PolicyCount& pc : freq) {
    arr.push_back({{"count", pc.count},
                   {"code", pc.policy.code()},
                   {"hash", hash_hex(pc.policy)},
                   {"policy", policy_to_json(pc.policy)}});
  }
  return arr;
}

nlohmann::ordered_json final_policy_json(const EvalReport& report) {
  nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
  for (const CandidateResult& c : report.candidates) {
    candidates.push_back({{"code", c.policy.code()},
                          {"hash", hash_hex(c.policy)},
                          {"count", c.count},
                          {"mean_return", c.mean_return},
                          {"std_error", c.std_error},
                          {"n", c.n},
                          {"exact_value", c.exact_value}});
  }
  const CandidateResult& f = report.final_result;
  return {{"policy", policy_to_json(report.final_policy)},
          {"code", f.policy.code()},
          {"hash", hash_hex(f.policy)},
          {"mean_return", f.mean_return},
          {"std_error", f.std_error},
          {"n", f.n},
          {"exact_value", f.exact_value},
          {"tie_break", "highest mean return, then lowest policy hash"},
          {"candidates", std::move(candidates)}};
}

nlohmann::ordered_json oracle_checks_json(const std::vector<OracleCheck>& checks,
                                          double tolerance_se) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  bool all_ok = true;
  for (const OracleCheck& c : checks) {
    all_ok = all_ok && c.within_tolerance;
    arr.push_back({{"label", c.label},
                   {"code", c.policy.code()},
                   {"mc_mean", c.mc_mean},
                   {"std_error", c.std_error},
                   {"n", c.n},
                   {"exact_value", c.exact_value},
                   {"within_tolerance", c.within_tolerance}});
  }
  return {{"tolerance_std_errors", tolerance_se},
          {"all_within_tolerance", all_ok},
          {"checks", std::move(arr)}};
}

}  // namespace reminisce

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "reminisce/evaluation.hpp"
#include "reminisce/qlearning.hpp"

namespace reminisce {

/// {"q": [[6 values] x 18], "ordering": "response-major"}
nlohmann::ordered_json qtable_to_json(const QTable& q);
/// Throws std::invalid_argument on shape or ordering mismatch.
QTable qtable_from_json(const nlohmann::json& j);

/// {"[0, -1, 0]": "a6", ...} in state-index order.
nlohmann::ordered_json policy_to_json(const PolicyTable& p);
PolicyTable policy_from_json(const nlohmann::json& j);

/// epoch,avg_return,q_sum,q_update
std::string trainlog_csv(const TrainLog& log);

/// epoch,epsilon_greedy_ql,greedy_ql,random_action,q_sum,q_update
std::string curves_csv(const EvalReport& report);

/// step,state,action,choice with states as "[r, e, c]"; episodes follow each
/// other, each restarting at step 0.
std::string traces_csv(const std::vector<EpisodeTrace>& traces);

/// experiment,steps,return,done_reason
std::string trace_summary_csv(const std::vector<EpisodeTrace>& traces);

nlohmann::ordered_json policy_frequency_json(const std::vector<PolicyCount>& freq);
nlohmann::ordered_json final_policy_json(const EvalReport& report);
nlohmann::ordered_json oracle_checks_json(const std::vector<OracleCheck>& checks,
                                          double tolerance_se);

}  // namespace reminisce

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "reminisce/domain.hpp"
#include "reminisce/patient_model.hpp"

namespace test_support {

using namespace reminisce;

// Every (state, action) pair leads to next(state, action) with probability one.
inline TransitionModel deterministic_model(
    const std::function<PwdState(const PwdState&, RobotAction)>& next,
    ChoiceDistribution choice = {0.0, 1.0, 0.0}) {
  TransitionModel m;
  for (int a = 0; a < kNumLearnableActions; ++a) {
    for (StateIndex s = 0; s < kNumStates; ++s) {
      m.matrices[a][s].fill(0.0);
      m.matrices[a][s][encode_state(next(decode_state(s), static_cast<RobotAction>(a)))] = 1.0;
    }
  }
  m.choice.fill(choice);
  m.label = "deterministic";
  return m;
}

inline TransitionModel constant_model(const PwdState& target,
                                      ChoiceDistribution choice = {0.0, 1.0, 0.0}) {
  return deterministic_model([target](const PwdState&, RobotAction) { return target; }, choice);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("reminisce_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline PwdState st(int r, int e, int c) {
  return PwdState{static_cast<ResponseRelevance>(r), static_cast<EmotionLevel>(e),
                  static_cast<ConfusionState>(c)};
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_greater = 1.0;  // one-sided, H1: mean(a) > mean(b)
  double p_two_sided = 1.0;
};

inline WelchResult welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double qa = va / static_cast<double>(a.size());
  const double qb = vb / static_cast<double>(b.size());
  WelchResult r;
  if (qa + qb == 0.0) {
    r.p_greater = ma > mb ? 0.0 : 1.0;
    r.p_two_sided = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(qa + qb);
  r.df = (qa + qb) * (qa + qb) /
         (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.df);
  r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace test_support
